#include "mallows/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "mallows/errors.hpp"
#include "mallows/jacobi.hpp"
#include "mallows/summation.hpp"

namespace mallows::spectral {

Eigen::MatrixXd center_kernel(const bridge::BridgeSolution& sol) {
  if (!(sol.residual < 10.0 * sol.tol)) {
    throw std::invalid_argument(
        "spectral::center_kernel: bridge residual above 10*tol; re-solve first");
  }
  const int m = sol.m;
  Eigen::MatrixXd k(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double s = sol.a_values[i] + sol.a_values[j];
      k(i, j) = std::exp(-costs::evaluate(sol.cost, sol.nodes[i], sol.nodes[j]) - s) - 1.0;
    }
  }
  return k;
}

Spectrum eigendecompose(const Eigen::MatrixXd& centered, int m) {
  if (centered.rows() != m || centered.cols() != m) {
    throw std::invalid_argument("spectral::eigendecompose: matrix is not m x m");
  }

  const Eigen::MatrixXd scaled = centered / static_cast<double>(m);
  const JacobiEigen<double> eig = jacobi_eigensolver(scaled);

  // order by |lambda| descending; break ties by value then index for determinism
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double fa = std::abs(eig.values[a]);
    const double fb = std::abs(eig.values[b]);
    if (fa != fb) return fa > fb;
    return eig.values[a] > eig.values[b];
  });

  Spectrum spec;
  spec.m = m;
  spec.eigenvalues.resize(m);
  spec.eigenfunctions.resize(m, m);
  const double root_m = std::sqrt(static_cast<double>(m));
  for (int l = 0; l < m; ++l) {
    spec.eigenvalues[l] = eig.values[order[l]];
    Eigen::VectorXd phi = root_m * eig.vectors.col(order[l]);
    Eigen::Index imax;
    phi.cwiseAbs().maxCoeff(&imax);
    if (phi[imax] < 0.0) phi = -phi;
    spec.eigenfunctions.col(l) = phi;
  }

  spec.retained = 0;
  while (spec.retained < m && std::abs(spec.eigenvalues[spec.retained]) >= kNoiseFloor) {
    ++spec.retained;
  }

  spec.sigma2 = spectral_gap(spec);
  spec.gap_holds = spec.eigenvalues.size() == 0 ||
                   std::abs(spec.eigenvalues[0]) < 1.0 - 1e-10;
  if (spec.gap_holds) {
    spec.fredholm_det = fredholm_determinant(spec);
    spec.conjectured_C = conjectured_constant(spec);
  } else {
    // the spectrum is still reported; the determinant is ill-conditioned
    spec.fredholm_det = std::numeric_limits<double>::quiet_NaN();
    spec.conjectured_C = std::numeric_limits<double>::quiet_NaN();
  }

  spec.lipschitz_estimates.resize(spec.retained);
  for (int l = 0; l < spec.retained; ++l) {
    spec.lipschitz_estimates[l] = empirical_lipschitz(spec.eigenfunctions.col(l));
  }

  // the uncentered operator must carry eigenvalue 1 on the constant direction
  const Eigen::MatrixXd uncentered =
      scaled + Eigen::MatrixXd::Constant(m, m, 1.0 / static_cast<double>(m));
  const JacobiEigen<double> ueig = jacobi_eigensolver(uncentered);
  spec.unit_eigenvalue_check = ueig.values.maxCoeff();

  return spec;
}

double spectral_gap(const Spectrum& spec) {
  double max_sq = 0.0;
  for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i) {
    max_sq = std::max(max_sq, spec.eigenvalues[i] * spec.eigenvalues[i]);
  }
  return 1.0 - max_sq;
}

double fredholm_determinant(const Spectrum& spec) {
  NeumaierSum<double> log_det;
  for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i) {
    const double lam = spec.eigenvalues[i];
    if (std::abs(lam) < kNoiseFloor) continue;
    if (std::abs(lam) >= 1.0 - 1e-10) {
      throw NumericalError(
          "spectral: |lambda| >= 1 - 1e-10, Fredholm determinant ill-conditioned");
    }
    log_det += std::log1p(-lam * lam);
  }
  return std::exp(log_det.value());
}

double conjectured_constant(const Spectrum& spec) {
  return 1.0 / std::sqrt(fredholm_determinant(spec));
}

double empirical_lipschitz(const Eigen::VectorXd& phi) {
  const Eigen::Index m = phi.size();
  double worst = 0.0;
  for (Eigen::Index j = 0; j + 1 < m; ++j) {
    worst = std::max(worst, std::abs(phi[j + 1] - phi[j]));
  }
  return worst * static_cast<double>(m);
}

double lipschitz_estimate(const Spectrum& spec, int i) {
  if (i < 0 || i >= spec.eigenfunctions.cols()) {
    throw std::out_of_range("spectral::lipschitz_estimate: index out of range");
  }
  return empirical_lipschitz(spec.eigenfunctions.col(i));
}

Eigen::VectorXd retained_eigenvalues(const Spectrum& spec) {
  return spec.eigenvalues.head(spec.retained);
}

}  // namespace mallows::spectral
