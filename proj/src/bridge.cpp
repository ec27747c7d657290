#include "mallows/bridge.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mallows/errors.hpp"
#include "mallows/summation.hpp"

namespace mallows::bridge {

namespace {

Eigen::VectorXd midpoint_nodes(int m) {
  Eigen::VectorXd x(m);
  for (int i = 0; i < m; ++i) x[i] = (i + 0.5) / m;
  return x;
}

// max_i |(1/m) sum_j rho(x_i, x_j) - 1| for rho built from kernel K and a
double marginal_residual(const Eigen::MatrixXd& K, const Eigen::VectorXd& a) {
  const Eigen::ArrayXd u = (-a.array()).exp();
  const Eigen::VectorXd s = K * u.matrix();
  const Eigen::ArrayXd row_means = u * s.array() / static_cast<double>(a.size());
  return (row_means - 1.0).abs().maxCoeff();
}

}  // namespace

Eigen::MatrixXd kernel_matrix(const costs::CostSpec& cost, const Eigen::VectorXd& xs,
                              const Eigen::VectorXd& ys) {
  Eigen::MatrixXd K(xs.size(), ys.size());
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    for (Eigen::Index j = 0; j < ys.size(); ++j) {
      K(i, j) = std::exp(-costs::evaluate(cost, xs[i], ys[j]));
    }
  }
  return K;
}

BridgeSolution solve(const costs::CostSpec& cost, int m, double tol, int max_iter) {
  if (m < 8) throw std::invalid_argument("bridge::solve: m must be >= 8");
  if (!(tol > 0.0)) throw std::invalid_argument("bridge::solve: tol must be > 0");
  if (max_iter < 1) throw std::invalid_argument("bridge::solve: max_iter must be >= 1");

  BridgeSolution sol;
  sol.cost = cost;
  sol.m = m;
  sol.tol = tol;
  sol.nodes = midpoint_nodes(m);

  const Eigen::MatrixXd K = kernel_matrix(cost, sol.nodes, sol.nodes);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(m);

  double residual = marginal_residual(K, a);
  for (int iter = 1; iter <= max_iter; ++iter) {
    const Eigen::ArrayXd u = (-a.array()).exp();
    const Eigen::VectorXd a_new =
        ((K * u.matrix()).array() / static_cast<double>(m)).log().matrix();
    const double change = (a_new - a).cwiseAbs().maxCoeff();
    a = 0.5 * (a + a_new);
    residual = marginal_residual(K, a);
    if (change < tol && residual < 10.0 * tol) {
      sol.a_values = a;
      sol.iterations = iter;
      sol.residual = residual;
      sol.gamma0 = -2.0 * a.mean() + 0.0;  // +0.0 normalizes -0
      return sol;
    }
  }
  throw IterationLimitError(
      "bridge::solve: no convergence after " + std::to_string(max_iter) +
          " iterations (residual " + std::to_string(residual) + ")",
      residual, max_iter);
}

Eigen::VectorXd potential_at(const BridgeSolution& sol, const Eigen::VectorXd& xs) {
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    if (!(xs[i] >= 0.0 && xs[i] <= 1.0)) {
      throw std::domain_error("bridge::potential_at: x outside [0,1]");
    }
  }
  const Eigen::MatrixXd K = kernel_matrix(sol.cost, xs, sol.nodes);
  const Eigen::ArrayXd u = (-sol.a_values.array()).exp();
  return ((K * u.matrix()).array() / static_cast<double>(sol.m)).log().matrix();
}

double potential_at(const BridgeSolution& sol, double x) {
  Eigen::VectorXd xs(1);
  xs[0] = x;
  return potential_at(sol, xs)[0];
}

double density(const BridgeSolution& sol, double x, double y) {
  // a(x) + a(y) commutes bit-exactly, so density(x,y) == density(y,x)
  const double s = potential_at(sol, x) + potential_at(sol, y);
  return std::exp(-costs::evaluate(sol.cost, x, y) - s);
}

Eigen::MatrixXd density_matrix(const BridgeSolution& sol, const Eigen::VectorXd& points) {
  const Eigen::VectorXd a = potential_at(sol, points);
  const Eigen::Index n = points.size();
  Eigen::MatrixXd rho(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      rho(i, j) = std::exp(-costs::evaluate(sol.cost, points[i], points[j]) - (a[i] + a[j]));
    }
  }
  return rho;
}

std::pair<double, double> gamma0_two_ways(const BridgeSolution& sol) {
  const double by_potential = -2.0 * sol.a_values.mean();

  // honest quadrature of int c rho + int rho log rho (log taken numerically)
  const int m = sol.m;
  NeumaierSum<double> acc;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double c = costs::evaluate(sol.cost, sol.nodes[i], sol.nodes[j]);
      const double rho = std::exp(-c - (sol.a_values[i] + sol.a_values[j]));
      acc += rho * c + rho * std::log(rho);
    }
  }
  const double by_quadrature = acc.value() / (static_cast<double>(m) * m);
  return {by_potential, by_quadrature};
}

double riemann_gap(const BridgeSolution& sol, int n) {
  if (n < 1) throw std::invalid_argument("bridge::riemann_gap: n must be >= 1");
  const double integral = sol.a_values.mean();
  Eigen::VectorXd pts(n);
  for (int i = 1; i <= n; ++i) pts[i - 1] = static_cast<double>(i) / n;
  const double sum = potential_at(sol, pts).sum();
  return n * (integral - sum / n);
}

}  // namespace mallows::bridge
