#include <doctest.h>

#include <cmath>

#include "mallows/bridge.hpp"
#include "mallows/errors.hpp"
#include "mallows/partition.hpp"
#include "mallows/series.hpp"
#include "mallows/spectral.hpp"

using namespace mallows;
using costs::CostSpec;

namespace {

Eigen::VectorXd lambdas(std::initializer_list<double> vals) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
  int i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}

double closed(double lam) { return 1.0 / std::sqrt(1.0 - lam * lam); }

struct Fixture {
  bridge::BridgeSolution sol = bridge::solve(CostSpec::quadratic(1.0), 128, 1e-12);
  spectral::Spectrum spec =
      spectral::eigendecompose(spectral::center_kernel(sol), sol.m);
};

// the paper-style r-subset formulation, written independently of the library's
// elementary-symmetric evaluation: 1 + sum_{r<=K} (n-r)!/n! sum over ordered
// distinct row subsets and distinct column tuples of the kernel product
double subset_formulation(const Eigen::MatrixXd& centered, int n, int K) {
  double total = 1.0;
  double falling = 1.0;  // n! / (n-r)!
  std::vector<int> rows, cols;
  for (int r = 1; r <= K; ++r) {
    falling *= n - r + 1;
    double sum = 0.0;
    rows.assign(r, 0);
    cols.assign(r, 0);
    // enumerate increasing row subsets and distinct column tuples
    auto rec_cols = [&](auto&& self, int t, double prod) -> void {
      if (t == r) {
        sum += prod;
        return;
      }
      for (int j = 0; j < n; ++j) {
        bool used = false;
        for (int u = 0; u < t; ++u) used |= cols[u] == j;
        if (used) continue;
        cols[t] = j;
        self(self, t + 1, prod * centered(rows[t], j));
      }
    };
    auto rec_rows = [&](auto&& self, int t, int from) -> void {
      if (t == r) {
        rec_cols(rec_cols, 0, 1.0);
        return;
      }
      for (int i = from; i < n; ++i) {
        rows[t] = i;
        self(self, t + 1, i + 1);
      }
    };
    rec_rows(rec_rows, 0, 0);
    total += sum / falling;
  }
  return total;
}

}  // namespace

TEST_SUITE_BEGIN("series");

TEST_CASE("hermite values at zero") {
  CHECK(series::hermite_zero(0) == 1);
  CHECK(series::hermite_zero(1) == 0);
  CHECK(series::hermite_zero(2) == -1);
  CHECK(series::hermite_zero(3) == 0);
  CHECK(series::hermite_zero(4) == 3);
  CHECK(series::hermite_zero(6) == -15);
  CHECK(series::hermite_zero(8) == 105);
  CHECK_THROWS_AS(series::hermite_zero(-1), std::invalid_argument);
  CHECK_THROWS_AS(series::hermite_zero(34 + 2), std::overflow_error);
}

TEST_CASE("odd double factorials and the matching identity") {
  CHECK(series::odd_double_factorial(0) == 1);  // (-1)!! = 1 by convention
  CHECK(series::odd_double_factorial(1) == 1);
  CHECK(series::odd_double_factorial(2) == 3);  // perfect matchings of K_4
  CHECK(series::odd_double_factorial(3) == 15);
  CHECK(series::odd_double_factorial(5) == 945);  // 1*3*5*7*9
  CHECK_THROWS_AS(series::odd_double_factorial(18), std::overflow_error);

  for (int b = 0; b <= 17; ++b) {
    const std::int64_t sign = b % 2 == 0 ? 1 : -1;
    CHECK(series::hermite_zero(2 * b) == sign * series::odd_double_factorial(b));
    CHECK(series::hermite_zero(2 * b + 1) == 0);
  }
}

TEST_CASE("dKL_limit basics") {
  CHECK(series::dKL_limit(lambdas({0.4, 0.2}), 0).value == 1.0);
  CHECK(series::dKL_limit(lambdas({0.0}), 40).value == 1.0);
  CHECK(series::dKL_limit(Eigen::VectorXd(), 40).value == 1.0);
  CHECK_THROWS_AS(series::dKL_limit(lambdas({1.0}), 10), std::domain_error);
  CHECK_THROWS_AS(series::dKL_limit(lambdas({0.5}), -2), std::invalid_argument);
}

TEST_CASE("single-eigenvalue series sums to (1-lambda^2)^(-1/2)") {
  for (double lam : {0.1, 0.3, 0.6}) {
    CHECK(std::abs(series::dKL_limit(lambdas({lam}), 60).value - closed(lam)) < 1e-8);
  }
  // at lambda = 0.9 the tail beyond b = K/2 = 30 is ~7e-4 and decays like
  // lambda^(2b): the truncation error is real, not a defect of the evaluation
  const double gap09 = std::abs(series::dKL_limit(lambdas({0.9}), 60).value - closed(0.9));
  CHECK(gap09 < 1e-2);
  CHECK(gap09 > 1e-5);
  CHECK(std::abs(series::dKL_limit(lambdas({0.9}), 220).value - closed(0.9)) < 1e-8);
}

TEST_CASE("dKL_limit is nondecreasing in K and >= 1") {
  const auto ls = lambdas({0.6, 0.3});
  double prev = 0.0;
  for (int K = 0; K <= 16; K += 2) {
    const double v = series::dKL_limit(ls, K).value;
    CHECK(v >= 1.0);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("dKL_limit is multiplicative over independent eigenvalues") {
  const double joint = series::dKL_limit(lambdas({0.6, 0.3}), 60).value;
  CHECK(std::abs(joint - closed(0.6) * closed(0.3)) < 1e-6);
}

TEST_CASE("closed form values") {
  CHECK(series::dL_closed_form(Eigen::VectorXd()).value == 1.0);
  CHECK(series::dL_closed_form(lambdas({0.6})).value == doctest::Approx(1.25).epsilon(1e-14));
  CHECK(series::dL_closed_form(lambdas({0.6, 0.3})).value ==
        doctest::Approx(1.0 / std::sqrt(0.5824)).epsilon(1e-14));
  CHECK_THROWS_AS(series::dL_closed_form(lambdas({-1.0})), std::domain_error);
}

TEST_CASE("closed form agrees with the spectral constant") {
  Fixture f;
  const double via_series =
      series::dL_closed_form(spectral::retained_eigenvalues(f.spec)).value;
  CHECK(std::abs(via_series - f.spec.conjectured_C) < 1e-12 * f.spec.conjectured_C);
}

TEST_CASE("dnK_exact: ones kernel and scale guards") {
  CHECK(series::dnK_exact(Eigen::MatrixXd::Ones(5, 5), 5, 3).value == 1.0);
  CHECK_THROWS_AS(series::dnK_exact(Eigen::MatrixXd::Ones(9, 9), 9, 2), SizeLimitError);
  CHECK_THROWS_AS(series::dnK_exact(Eigen::MatrixXd::Ones(5, 5), 5, 6), std::invalid_argument);
  CHECK_THROWS_AS(series::dnK_exact(Eigen::MatrixXd::Ones(4, 5), 4, 2), std::invalid_argument);
}

TEST_CASE("dnK_exact at K = n reconstitutes D_n") {
  Fixture f;
  for (int n = 3; n <= 7; ++n) {
    const Eigen::MatrixXd rho = bridge::density_matrix(f.sol, partition::evaluation_points(n));
    const double full = series::dnK_exact(rho, n, n).value;
    const double d = partition::compute_Dn(f.sol, n, partition::Method::brute).D_n;
    CHECK(std::abs(full - d) < 1e-10 * d);
  }
}

TEST_CASE("dnK_exact matches the subset formulation") {
  Fixture f;
  const int n = 6;
  const Eigen::MatrixXd rho = bridge::density_matrix(f.sol, partition::evaluation_points(n));
  const Eigen::MatrixXd centered = rho.array() - 1.0;
  // K = 1: 1 + (1/n) sum_ij centered(i,j), by hand
  const double k1_direct = 1.0 + centered.sum() / n;
  CHECK(series::dnK_exact(rho, n, 1).value == doctest::Approx(k1_direct).epsilon(1e-12));
  for (int K = 1; K <= 3; ++K) {
    CHECK(series::dnK_exact(rho, n, K).value ==
          doctest::Approx(subset_formulation(centered, n, K)).epsilon(1e-11));
  }
}

TEST_CASE("nystrom extension reproduces grid values and guards the noise floor") {
  Fixture f;
  const int L = std::min(3, f.spec.retained);
  const Eigen::MatrixXd ext = series::nystrom_extend(f.sol, f.spec, f.sol.nodes, L);
  CHECK((ext - f.spec.eigenfunctions.leftCols(L)).cwiseAbs().maxCoeff() < 1e-8);
  CHECK_THROWS_AS(
      series::nystrom_extend(f.sol, f.spec, f.sol.nodes, f.spec.retained + 3),
      NumericalError);
}

TEST_CASE("dnKL_exact approaches dnK_exact as L grows") {
  Fixture f;
  const int n = 6;
  const Eigen::MatrixXd rho = bridge::density_matrix(f.sol, partition::evaluation_points(n));
  const double full = series::dnK_exact(rho, n, n).value;
  double prev_err = 1e300;
  for (int L = 1; L <= std::min(4, f.spec.retained); ++L) {
    const double v = series::dnKL_exact(f.sol, f.spec, n, n, L).value;
    const double err = std::abs(v - full);
    CHECK(err < prev_err + 1e-14);
    prev_err = err;
  }
  CHECK(prev_err < 1e-6);
}

TEST_CASE("dnKL_exact matches a hand-rolled rank-1 evaluation") {
  Fixture f;
  const int n = 6, K = 2;
  const Eigen::VectorXd pts = partition::evaluation_points(n);
  const Eigen::MatrixXd phi = series::nystrom_extend(f.sol, f.spec, pts, 1);
  const Eigen::MatrixXd rank1 = f.spec.eigenvalues[0] * phi.col(0) * phi.col(0).transpose();
  CHECK(series::dnKL_exact(f.sol, f.spec, n, K, 1).value ==
        doctest::Approx(subset_formulation(rank1, n, K)).epsilon(1e-12));
}

TEST_CASE("normalized square sums trend as orthonormality dictates") {
  Fixture f;
  SUBCASE("r = 1: near-zero mean, O(1/n)") {
    auto value_at = [&](int n) {
      const Eigen::MatrixXd phi =
          series::nystrom_extend(f.sol, f.spec, partition::evaluation_points(n), 1);
      return series::normalized_square_sum(phi, n);
    };
    const double v50 = value_at(50);
    const double v100 = value_at(100);
    CHECK(v100 < 0.7 * v50);  // measured ~0.059 -> ~0.030
    CHECK(v100 < 0.05);
  }
  SUBCASE("r = 2, same eigenfunction twice: toward 1") {
    double prev_gap = 1e300;
    for (int n : {10, 24, 48}) {
      const Eigen::MatrixXd one =
          series::nystrom_extend(f.sol, f.spec, partition::evaluation_points(n), 1);
      Eigen::MatrixXd pair(n, 2);
      pair.col(0) = one.col(0);
      pair.col(1) = one.col(0);
      const double gap = std::abs(series::normalized_square_sum(pair, n) - 1.0);
      CHECK(gap < prev_gap);
      prev_gap = gap;
    }
    CHECK(prev_gap < 0.15);
  }
  SUBCASE("r = 2, distinct eigenfunctions: toward 0") {
    double prev = 1e300;
    for (int n : {10, 24, 48}) {
      const Eigen::MatrixXd two =
          series::nystrom_extend(f.sol, f.spec, partition::evaluation_points(n), 2);
      const double v = series::normalized_square_sum(two, n);
      CHECK(v < prev + 1e-12);
      prev = v;
    }
    CHECK(prev < 0.05);
  }
  SUBCASE("guards") {
    CHECK_THROWS_AS(series::normalized_square_sum(Eigen::MatrixXd::Ones(10, 5), 10),
                    SizeLimitError);
    CHECK_THROWS_AS(series::normalized_square_sum(Eigen::MatrixXd::Ones(10, 2), 9),
                    std::invalid_argument);
  }
}

TEST_SUITE_END();
