#include "mallows/partition.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "mallows/errors.hpp"
#include "mallows/summation.hpp"

namespace mallows::partition {

namespace {

void check_square(const Eigen::Ref<const Eigen::MatrixXd>& M) {
  if (M.rows() != M.cols()) {
    throw std::invalid_argument("permanent: matrix must be square");
  }
}

// perm(M) = mantissa * 2^shift; rows are pre-scaled by exact powers of two
// so subset products stay far from overflow for any entry magnitudes.
struct ScaledPermanent {
  DoubleDouble mantissa;
  long shift = 0;
  bool zero = false;
};

ScaledPermanent ryser_scaled(const Eigen::Ref<const Eigen::MatrixXd>& M) {
  const int n = static_cast<int>(M.rows());
  ScaledPermanent out;
  if (n == 0) {
    out.mantissa = DoubleDouble(1.0);
    return out;
  }

  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i) {
    const double biggest = M.row(i).cwiseAbs().maxCoeff();
    if (biggest == 0.0) {
      out.zero = true;
      return out;
    }
    const int e = std::ilogb(biggest) + 1;
    A.row(i) = M.row(i) * std::ldexp(1.0, -e);
    out.shift += e;
  }

  std::vector<DoubleDouble> row_sum(n);
  DoubleDouble acc;
  std::uint64_t gray = 0;
  const std::uint64_t count = std::uint64_t(1) << n;
  for (std::uint64_t k = 1; k < count; ++k) {
    const std::uint64_t next = k ^ (k >> 1);
    const std::uint64_t flipped = next ^ gray;
    const int j = std::countr_zero(flipped);
    gray = next;
    if (next & flipped) {
      for (int i = 0; i < n; ++i) row_sum[i] = row_sum[i] + A(i, j);
    } else {
      for (int i = 0; i < n; ++i) row_sum[i] = row_sum[i] - A(i, j);
    }
    DoubleDouble prod = row_sum[0];
    for (int i = 1; i < n; ++i) prod = prod * row_sum[i];
    const bool negate = ((n - std::popcount(gray)) & 1) != 0;
    acc = acc + (negate ? -prod : prod);
  }
  out.mantissa = acc;
  return out;
}

}  // namespace

double permanent_brute(const Eigen::Ref<const Eigen::MatrixXd>& M) {
  check_square(M);
  const int n = static_cast<int>(M.rows());
  if (n > kBruteCap) {
    throw SizeLimitError("permanent_brute: n > " + std::to_string(kBruteCap));
  }
  if (n == 0) return 1.0;
  std::vector<int> cols(n);
  std::iota(cols.begin(), cols.end(), 0);
  NeumaierSum<double> acc;
  do {
    double prod = 1.0;
    for (int i = 0; i < n; ++i) prod *= M(i, cols[i]);
    acc += prod;
  } while (std::next_permutation(cols.begin(), cols.end()));
  return acc.value();
}

double permanent_ryser(const Eigen::Ref<const Eigen::MatrixXd>& M, int cap) {
  check_square(M);
  const int n = static_cast<int>(M.rows());
  if (n > cap || n > 62) {
    throw SizeLimitError("permanent_ryser: n > cap (" + std::to_string(cap) + ")");
  }
  const ScaledPermanent sp = ryser_scaled(M);
  if (sp.zero) return 0.0;
  return sp.mantissa.value() * std::ldexp(1.0, static_cast<int>(sp.shift));
}

double log_permanent_positive(const Eigen::Ref<const Eigen::MatrixXd>& M, Method method,
                              int cap) {
  check_square(M);
  if (M.rows() > 0 && !(M.minCoeff() > 0.0)) {
    throw std::invalid_argument("log_permanent_positive: entries must be > 0");
  }
  if (method == Method::brute) {
    const double p = permanent_brute(M);
    if (!(p > 0.0)) {
      throw NumericalError("permanent_brute: positive matrix gave non-positive value");
    }
    return std::log(p);
  }
  const int n = static_cast<int>(M.rows());
  if (n > cap || n > 62) {
    throw SizeLimitError("permanent_ryser: n > cap (" + std::to_string(cap) + ")");
  }
  const ScaledPermanent sp = ryser_scaled(M);
  const double mant = sp.mantissa.value();
  if (sp.zero || !(mant > 0.0)) {
    throw NumericalError(
        "permanent_ryser: positive matrix lost its sign to rounding (n = " +
        std::to_string(n) + ")");
  }
  return std::log(mant) + static_cast<double>(sp.shift) * std::numbers::ln2;
}

Eigen::VectorXd evaluation_points(int n) {
  Eigen::VectorXd pts(n);
  for (int i = 1; i <= n; ++i) pts[i - 1] = static_cast<double>(i) / n;
  return pts;
}

namespace {

PartitionPoint assemble_point(const bridge::BridgeSolution& sol, int n, double log_D,
                              Method method) {
  const Eigen::VectorXd pts = evaluation_points(n);
  const double potential_sum = bridge::potential_at(sol, pts).sum();
  const double mean_a = sol.a_values.mean();

  PartitionPoint p;
  p.n = n;
  p.method = method;
  p.D_n = std::exp(log_D);
  p.L_n = std::exp(log_D + 2.0 * potential_sum);
  p.scaled = std::exp(log_D + 2.0 * (potential_sum - n * mean_a));
  return p;
}

}  // namespace

PartitionPoint compute_Dn(const bridge::BridgeSolution& sol, int n, Method method,
                          int cap) {
  if (n < 1) throw std::invalid_argument("compute_Dn: n must be >= 1");
  if (method == Method::monte_carlo) {
    throw std::invalid_argument("compute_Dn: use mc_estimate_Dn for the Monte Carlo path");
  }
  const Eigen::MatrixXd R = bridge::density_matrix(sol, evaluation_points(n));
  const double log_D = log_permanent_positive(R, method, cap) - std::lgamma(n + 1.0);
  return assemble_point(sol, n, log_D, method);
}

PartitionPoint compute_Ln(const bridge::BridgeSolution& sol, int n, Method method,
                          int cap) {
  PartitionPoint p = compute_Dn(sol, n, method, cap);

  // direct route: permanent of exp(-c(i/n, j/n)) / n!
  const Eigen::VectorXd pts = evaluation_points(n);
  const Eigen::MatrixXd E = bridge::kernel_matrix(sol.cost, pts, pts);
  const double log_L_direct = log_permanent_positive(E, method, cap) - std::lgamma(n + 1.0);

  const double log_L_identity = std::log(p.L_n);
  if (std::abs(log_L_direct - log_L_identity) > 1e-8) {
    throw NumericalError("compute_Ln: direct and identity routes disagree at n = " +
                         std::to_string(n));
  }
  return p;
}

PartitionPoint mc_estimate_Dn(const bridge::BridgeSolution& sol, int n, long samples,
                              std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("mc_estimate_Dn: n must be >= 1");
  if (samples < 1000) {
    throw std::invalid_argument("mc_estimate_Dn: samples must be >= 1000");
  }
  const Eigen::MatrixXd R = bridge::density_matrix(sol, evaluation_points(n));

  std::mt19937_64 rng(seed);
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);

  // Welford: the products concentrate near 1, a naive sum of squares would cancel
  double mean = 0.0;
  double m2 = 0.0;
  for (long s = 1; s <= samples; ++s) {
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
      std::swap(idx[i], idx[j]);
    }
    double prod = 1.0;
    for (int i = 0; i < n; ++i) prod *= R(i, idx[i]);
    const double delta = prod - mean;
    mean += delta / static_cast<double>(s);
    m2 += delta * (prod - mean);
  }
  const double stderr_est =
      std::sqrt(m2 / (static_cast<double>(samples) - 1.0) / static_cast<double>(samples));

  PartitionPoint p = assemble_point(sol, n, std::log(mean), Method::monte_carlo);
  p.D_n = mean;  // keep the unlogged sample mean bit-exact
  p.mc_stderr = stderr_est;
  p.seed = seed;
  return p;
}

std::vector<PartitionPoint> scaled_sequence(const bridge::BridgeSolution& sol, int n_min,
                                            int n_max, Method method, const McOptions& mc,
                                            int cap) {
  if (n_min < 1 || n_max < n_min) {
    throw std::invalid_argument("scaled_sequence: need 1 <= n_min <= n_max");
  }
  std::vector<PartitionPoint> table;
  table.reserve(n_max - n_min + 1);
  for (int n = n_min; n <= n_max; ++n) {
    if (method == Method::monte_carlo) {
      table.push_back(mc_estimate_Dn(sol, n, mc.samples, mc.seed + static_cast<std::uint64_t>(n)));
    } else {
      table.push_back(compute_Ln(sol, n, method, cap));
    }
  }
  return table;
}

std::string method_name(Method method) {
  switch (method) {
    case Method::ryser: return "ryser";
    case Method::brute: return "brute";
    case Method::monte_carlo: return "mc";
  }
  return "unknown";
}

Method method_from_name(const std::string& name) {
  if (name == "ryser") return Method::ryser;
  if (name == "brute") return Method::brute;
  if (name == "mc" || name == "monte-carlo") return Method::monte_carlo;
  throw std::invalid_argument("partition: unknown method '" + name + "'");
}

}  // namespace mallows::partition
