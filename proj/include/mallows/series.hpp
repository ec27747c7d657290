#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "mallows/bridge.hpp"
#include "mallows/spectral.hpp"

namespace mallows::series {

enum class TruncationKind {
  finite_n,              // D_{n,K}: subset expansion truncated at |A| <= K
  finite_n_rank_limited, // D_{n,K}^{(L)}: same with the rank-L kernel
  limit,                 // D_K^{(L)}: n -> infinity combinatorial sum
  closed_form            // D^{(L)} = prod (1 - lambda^2)^{-1/2}
};

struct TruncationResult {
  int K = 0;
  int L = 0;
  double value = 0.0;
  TruncationKind kind = TruncationKind::limit;
};

// Value at zero of the k-th Hermite polynomial, H_{n+1}(x) = x H_n - n H_{n-1}:
// H_{2b}(0) = (-1)^b (2b-1)!!, odd k gives 0. Exact in int64 for k <= 34.
std::int64_t hermite_zero(int k);

// (2b-1)!! with (-1)!! = 1; the number of perfect matchings of K_{2b}.
// Exact in int64 for b <= 17.
std::int64_t odd_double_factorial(int b);

// D_K^{(L)} = 1 + sum over b-vectors (b_1..b_L) with 1 <= sum b_i <= K/2 of
// prod_i lambda_i^{2 b_i} ((2 b_i - 1)!!)^2 / (2 b_i)!. Nondecreasing in K,
// converges to the closed form. Enumeration cost grows combinatorially in L.
TruncationResult dKL_limit(const Eigen::VectorXd& lambdas, int K);

// prod_i (1 - lambda_i^2)^{-1/2}.
TruncationResult dL_closed_form(const Eigen::VectorXd& lambdas);

// D_{n,K} by brute enumeration over permutations with the subset expansion
// carried as elementary symmetric sums; rho is the n x n density matrix at
// points i/n. Oracle scale: n <= 8.
TruncationResult dnK_exact(const Eigen::MatrixXd& rho, int n, int K);

// Eigenfunction values at arbitrary points by one application of the kernel
// against the grid eigenvector: phi(x) = (1/lambda) (1/m) sum_j rho~(x, x_j) phi(x_j).
// Throws NumericalError when |lambda_l| is below the noise floor.
Eigen::MatrixXd nystrom_extend(const bridge::BridgeSolution& sol,
                               const spectral::Spectrum& spec,
                               const Eigen::VectorXd& points, int L);

// D_{n,K}^{(L)}: as dnK_exact with the kernel replaced by the rank-L
// reconstruction sum_{l<=L} lambda_l phi_l(x) phi_l(y) at points i/n.
TruncationResult dnKL_exact(const bridge::BridgeSolution& sol,
                            const spectral::Spectrum& spec, int n, int K, int L);

// [ n^{-r/2} sum over distinct index tuples (i_1..i_r) prod_t phi_t(i_t/n) ]^2
// for r = phis.cols() functions tabulated at i/n (rows). r <= 4.
double normalized_square_sum(const Eigen::MatrixXd& phis, int n);

}  // namespace mallows::series
