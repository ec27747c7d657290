#pragma once

#include <Eigen/Dense>
#include <utility>

#include "mallows/costs.hpp"

namespace mallows::bridge {

// Converged discretization of the symmetric Schrodinger system for uniform
// marginals: a solves  a(x) = log (1/m) sum_j exp(-c(x, x_j) - a(x_j))  on
// the midpoint grid x_i = (i - 1/2)/m, and the coupling density is
// rho(x,y) = exp(-c(x,y) - a(x) - a(y)).
struct BridgeSolution {
  costs::CostSpec cost;
  int m = 0;
  Eigen::VectorXd nodes;      // (i - 1/2)/m
  Eigen::VectorXd a_values;   // potential at the nodes
  double gamma0 = 0.0;        // -2 * mean(a): entropic transport value
  int iterations = 0;
  double residual = 0.0;      // max_i |(1/m) sum_j rho(x_i,x_j) - 1|
  double tol = 0.0;
};

// Matrix exp(-c(x_i, y_j)).
Eigen::MatrixXd kernel_matrix(const costs::CostSpec& cost,
                              const Eigen::VectorXd& xs,
                              const Eigen::VectorXd& ys);

// Damped fixed-point iteration a <- (a + a_new)/2 from a = 0. Succeeds when
// the undamped update is below tol in sup norm AND the marginal residual is
// below 10*tol; otherwise throws IterationLimitError with the last residual.
BridgeSolution solve(const costs::CostSpec& cost, int m, double tol = 1e-12,
                     int max_iter = 100000);

// Potential off the solver grid by one application of the converged
// fixed-point map (not interpolation).
double potential_at(const BridgeSolution& sol, double x);
Eigen::VectorXd potential_at(const BridgeSolution& sol, const Eigen::VectorXd& xs);

// rho(x,y); symmetric in (x,y) bit-for-bit, strictly positive.
double density(const BridgeSolution& sol, double x, double y);

// rho(p_i, p_j) for arbitrary evaluation points (columns/rows share one
// batched potential evaluation).
Eigen::MatrixXd density_matrix(const BridgeSolution& sol, const Eigen::VectorXd& points);

// Gamma_0 two ways: (-2 * grid mean of a, midpoint quadrature of
// int c rho + int rho log rho). Both approximate the entropic OT value.
std::pair<double, double> gamma0_two_ways(const BridgeSolution& sol);

// n * [ int a  -  (1/n) sum_{i=1..n} a(i/n) ]; the integral uses the solver
// grid quadrature, the samples use potential_at. Tends to (a(1)-a(0))/2 = 0
// for reflection-symmetric costs.
double riemann_gap(const BridgeSolution& sol, int n);

}  // namespace mallows::bridge
