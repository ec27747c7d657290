#include "mallows/series.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "mallows/errors.hpp"
#include "mallows/summation.hpp"

namespace mallows::series {

std::int64_t hermite_zero(int k) {
  if (k < 0) throw std::invalid_argument("hermite_zero: k must be >= 0");
  if (k % 2 == 1) return 0;
  if (k > 34) throw std::overflow_error("hermite_zero: overflows int64 beyond k = 34");
  // H_{n+1}(0) = -n H_{n-1}(0)
  std::int64_t even = 1;  // H_0(0)
  for (int n = 1; n < k; n += 2) even *= -n;
  return even;
}

std::int64_t odd_double_factorial(int b) {
  if (b < 0) throw std::invalid_argument("odd_double_factorial: b must be >= 0");
  if (b > 17) {
    throw std::overflow_error("odd_double_factorial: overflows int64 beyond b = 17");
  }
  std::int64_t value = 1;  // (-1)!! = 1 by convention
  for (int j = 1; j < 2 * b; j += 2) value *= j;
  return value;
}

namespace {

void check_open_unit(const Eigen::VectorXd& lambdas) {
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    if (!(std::abs(lambdas[i]) < 1.0)) {
      throw std::domain_error("series: eigenvalues must satisfy |lambda| < 1");
    }
  }
}

// w_b = ((2b-1)!!)^2 / (2b)!, via w_b = w_{b-1} (2b-1)/(2b)
std::vector<double> matching_weights(int max_b) {
  std::vector<double> w(max_b + 1);
  w[0] = 1.0;
  for (int b = 1; b <= max_b; ++b) {
    w[b] = w[b - 1] * (2.0 * b - 1.0) / (2.0 * b);
  }
  return w;
}

}  // namespace

TruncationResult dKL_limit(const Eigen::VectorXd& lambdas, int K) {
  if (K < 0) throw std::invalid_argument("dKL_limit: K must be >= 0");
  check_open_unit(lambdas);
  const int L = static_cast<int>(lambdas.size());
  const int budget = K / 2;  // sum b_i <= K/2
  const std::vector<double> w = matching_weights(budget);

  NeumaierSum<double> total;
  // depth-first over b-vectors; per-eigenvalue factors decrease in b, so an
  // underflowing branch cannot recover and is pruned
  auto recurse = [&](auto&& self, int l, int remaining, double partial) -> void {
    if (l == L) {
      total += partial;
      return;
    }
    for (int b = 0; b <= remaining; ++b) {
      const double term =
          b == 0 ? partial : partial * w[b] * std::pow(lambdas[l], 2 * b);
      if (b > 0 && term < 1e-300) break;
      self(self, l + 1, remaining - b, term);
    }
  };
  recurse(recurse, 0, budget, 1.0);

  // the all-zero b-vector contributes the leading 1
  return {K, L, total.value(), TruncationKind::limit};
}

TruncationResult dL_closed_form(const Eigen::VectorXd& lambdas) {
  check_open_unit(lambdas);
  double value = 1.0;
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    value /= std::sqrt(1.0 - lambdas[i] * lambdas[i]);
  }
  return {0, static_cast<int>(lambdas.size()), value, TruncationKind::closed_form};
}

namespace {

// 1 + (1/n!) sum_sigma sum_{r=1..K} e_r(v_sigma) with v_i = kernel(i, sigma_i);
// e_r are elementary symmetric sums, which is exactly the subset expansion
double truncated_expansion(const Eigen::MatrixXd& centered, int n, int K) {
  std::vector<int> cols(n);
  std::iota(cols.begin(), cols.end(), 0);
  std::vector<double> e(K + 1);
  NeumaierSum<double> acc;
  do {
    std::fill(e.begin(), e.end(), 0.0);
    e[0] = 1.0;
    int seen = 0;
    for (int i = 0; i < n; ++i) {
      const double v = centered(i, cols[i]);
      ++seen;
      for (int r = std::min(seen, K); r >= 1; --r) e[r] += e[r - 1] * v;
    }
    double subset_sum = 0.0;
    for (int r = 1; r <= K; ++r) subset_sum += e[r];
    acc += subset_sum;
  } while (std::next_permutation(cols.begin(), cols.end()));

  double factorial = 1.0;
  for (int i = 2; i <= n; ++i) factorial *= i;
  return 1.0 + acc.value() / factorial;
}

}  // namespace

TruncationResult dnK_exact(const Eigen::MatrixXd& rho, int n, int K) {
  if (rho.rows() != n || rho.cols() != n) {
    throw std::invalid_argument("dnK_exact: rho must be n x n");
  }
  if (n > 8) throw SizeLimitError("dnK_exact: oracle scale is n <= 8");
  if (K < 0 || K > n) throw std::invalid_argument("dnK_exact: need 0 <= K <= n");
  const Eigen::MatrixXd centered = rho.array() - 1.0;
  return {K, 0, truncated_expansion(centered, n, K), TruncationKind::finite_n};
}

Eigen::MatrixXd nystrom_extend(const bridge::BridgeSolution& sol,
                               const spectral::Spectrum& spec,
                               const Eigen::VectorXd& points, int L) {
  if (L < 0 || L > spec.eigenvalues.size()) {
    throw std::invalid_argument("nystrom_extend: L out of range");
  }
  for (int l = 0; l < L; ++l) {
    if (std::abs(spec.eigenvalues[l]) < spectral::kNoiseFloor) {
      throw NumericalError(
          "nystrom_extend: eigenvalue below noise floor, extension ill-conditioned");
    }
  }
  const Eigen::VectorXd a_ext = bridge::potential_at(sol, points);
  Eigen::MatrixXd centered(points.size(), sol.m);
  for (Eigen::Index i = 0; i < points.size(); ++i) {
    for (int j = 0; j < sol.m; ++j) {
      centered(i, j) = std::exp(-costs::evaluate(sol.cost, points[i], sol.nodes[j]) -
                                (a_ext[i] + sol.a_values[j])) -
                       1.0;
    }
  }
  Eigen::MatrixXd phi = centered * spec.eigenfunctions.leftCols(L) / static_cast<double>(sol.m);
  for (int l = 0; l < L; ++l) phi.col(l) /= spec.eigenvalues[l];
  return phi;
}

TruncationResult dnKL_exact(const bridge::BridgeSolution& sol,
                            const spectral::Spectrum& spec, int n, int K, int L) {
  if (n > 8) throw SizeLimitError("dnKL_exact: oracle scale is n <= 8");
  if (K < 0 || K > n) throw std::invalid_argument("dnKL_exact: need 0 <= K <= n");
  Eigen::VectorXd pts(n);
  for (int i = 1; i <= n; ++i) pts[i - 1] = static_cast<double>(i) / n;
  const Eigen::MatrixXd phi = nystrom_extend(sol, spec, pts, L);
  const Eigen::MatrixXd rank_limited =
      phi * spec.eigenvalues.head(L).asDiagonal() * phi.transpose();
  return {K, L, truncated_expansion(rank_limited, n, K),
          TruncationKind::finite_n_rank_limited};
}

double normalized_square_sum(const Eigen::MatrixXd& phis, int n) {
  const int r = static_cast<int>(phis.cols());
  if (phis.rows() != n) throw std::invalid_argument("normalized_square_sum: need n rows");
  if (r < 1 || r > 4) throw SizeLimitError("normalized_square_sum: r must be in 1..4");
  if (std::pow(static_cast<double>(n), r) > 2e8) {
    throw SizeLimitError("normalized_square_sum: n^r enumeration too large");
  }

  NeumaierSum<double> acc;
  std::vector<int> tuple(r);
  std::vector<bool> used(n, false);
  auto recurse = [&](auto&& self, int t, double partial) -> void {
    if (t == r) {
      acc += partial;
      return;
    }
    for (int i = 0; i < n; ++i) {
      if (used[i]) continue;
      used[i] = true;
      self(self, t + 1, partial * phis(i, t));
      used[i] = false;
    }
  };
  recurse(recurse, 0, 1.0);

  const double s = acc.value() * std::pow(static_cast<double>(n), -0.5 * r);
  return s * s;
}

}  // namespace mallows::series
