#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "mallows/bridge.hpp"

namespace mallows::partition {

enum class Method { ryser, brute, monte_carlo };

// One row of the partition-function table.
//   D_n    = perm(rho(i/n, j/n)) / n!
//   L_n    = D_n * exp(2 sum_i a(i/n))            (exact algebra)
//   scaled = e^{n Gamma_0} L_n = D_n * exp(2 [sum_i a(i/n) - n int a])
struct PartitionPoint {
  int n = 0;
  double D_n = 0.0;
  double L_n = 0.0;
  double scaled = 0.0;
  Method method = Method::ryser;
  std::optional<double> mc_stderr;
  std::optional<std::uint64_t> seed;
};

inline constexpr int kBruteCap = 9;
inline constexpr int kRyserCapDefault = 26;

// Sum over all n! permutations by direct enumeration (oracle path), n <= 9.
double permanent_brute(const Eigen::Ref<const Eigen::MatrixXd>& M);

// Ryser inclusion-exclusion with Gray-code subset updates. Row sums, term
// products and the signed accumulator are double-double: the subset sum
// cancels ~e^n of its own magnitude, which a plain double cannot spare.
double permanent_ryser(const Eigen::Ref<const Eigen::MatrixXd>& M,
                       int cap = kRyserCapDefault);

// log(perm(M)) for an entrywise-positive M, with exact power-of-two row
// scaling folded back in log space. Throws NumericalError if rounding ever
// drives the positive permanent non-positive.
double log_permanent_positive(const Eigen::Ref<const Eigen::MatrixXd>& M,
                              Method method, int cap = kRyserCapDefault);

// Evaluation points i/n, i = 1..n (the grid of the partition sums).
Eigen::VectorXd evaluation_points(int n);

// D_n from the bridge density; n! folded in by subtracting log n!.
PartitionPoint compute_Dn(const bridge::BridgeSolution& sol, int n, Method method,
                          int cap = kRyserCapDefault);

// L_n two ways: direct permanent of exp(-c(i/n, j/n)), and D_n exp(2 sum a).
// Returns the identity route (O(1) matrix entries); throws NumericalError if
// the routes disagree beyond 1e-8 relative.
PartitionPoint compute_Ln(const bridge::BridgeSolution& sol, int n,
                          Method method = Method::ryser, int cap = kRyserCapDefault);

struct McOptions {
  long samples = 1000000;
  std::uint64_t seed = 1;
};

// Sample mean of prod_i rho(i/n, sigma_i/n) over uniform permutations drawn
// by Fisher-Yates from mt19937_64(seed). Deterministic given the seed.
PartitionPoint mc_estimate_Dn(const bridge::BridgeSolution& sol, int n, long samples,
                              std::uint64_t seed);

// Table of PartitionPoints for n = n_min..n_max.
std::vector<PartitionPoint> scaled_sequence(const bridge::BridgeSolution& sol, int n_min,
                                            int n_max, Method method,
                                            const McOptions& mc = {},
                                            int cap = kRyserCapDefault);

std::string method_name(Method method);
Method method_from_name(const std::string& name);

}  // namespace mallows::partition
