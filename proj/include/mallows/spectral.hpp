#pragma once

#include <Eigen/Dense>

#include "mallows/bridge.hpp"

namespace mallows::spectral {

// eigenvalues with |lambda| below this are indistinguishable from 1 in the
// determinant product and are dropped from it
inline constexpr double kNoiseFloor = 1e-12;

// Nystrom spectrum of the centered bridge kernel rho - 1 on the midpoint
// grid. Eigenvalues are sorted by descending |lambda|; eigenfunctions are
// grid functions with (1/m) sum phi^2 = 1, sign fixed so the entry of
// largest magnitude is positive.
struct Spectrum {
  int m = 0;
  Eigen::VectorXd eigenvalues;          // all m, unit eigenvalue not present
  Eigen::MatrixXd eigenfunctions;       // column l <-> eigenvalues[l]
  double sigma2 = 1.0;                  // 1 - max lambda^2
  double fredholm_det = 1.0;            // prod (1 - lambda^2), retained only
  double conjectured_C = 1.0;           // fredholm_det^{-1/2}
  Eigen::VectorXd lipschitz_estimates;  // one per retained eigenpair
  double unit_eigenvalue_check = 1.0;   // top eigenvalue of uncentered (1/m) rho
  int retained = 0;                     // count with |lambda| >= kNoiseFloor
  bool gap_holds = true;                // max lambda^2 < 1 within tolerance
};

// rho(x_i, x_j) - 1 on the solver grid. Throws if the bridge residual is
// above its own 10*tol contract (the centered row means inherit it).
Eigen::MatrixXd center_kernel(const bridge::BridgeSolution& sol);

// Full spectrum of (1/m) * centered via cyclic Jacobi, plus the unit
// eigenvalue check on the uncentered operator (1/m)(centered + ones).
Spectrum eigendecompose(const Eigen::MatrixXd& centered, int m);

// sigma^2 = 1 - max lambda^2.
double spectral_gap(const Spectrum& spec);

// prod (1 - lambda^2) over retained eigenvalues, accumulated in log space.
// Throws NumericalError if any |lambda| >= 1 - 1e-10.
double fredholm_determinant(const Spectrum& spec);

// fredholm_det^{-1/2}.
double conjectured_constant(const Spectrum& spec);

// m * max_j |phi(x_{j+1}) - phi(x_j)|: divided-difference Lipschitz estimate.
double empirical_lipschitz(const Eigen::VectorXd& phi);
double lipschitz_estimate(const Spectrum& spec, int i);

// eigenvalues with |lambda| >= kNoiseFloor, in stored order
Eigen::VectorXd retained_eigenvalues(const Spectrum& spec);

}  // namespace mallows::spectral
