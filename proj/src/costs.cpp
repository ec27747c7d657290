#include "mallows/costs.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "mallows/errors.hpp"

namespace mallows::costs {

namespace {

void check_beta(double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("cost: beta must be finite and >= 0");
  }
}

void check_domain(double x, double y) {
  if (!(x >= 0.0 && x <= 1.0) || !(y >= 0.0 && y <= 1.0)) {
    throw std::domain_error("cost: arguments outside [0,1]^2");
  }
}

// Bilinear interpolation on the midpoint grid (i-1/2)/m, constant beyond the
// outermost midpoints. Arguments are canonicalized to x <= y so the result is
// bit-symmetric (the stored table is symmetric).
double interpolate_table(const Eigen::MatrixXd& t, double x, double y) {
  if (y < x) std::swap(x, y);
  const auto m = t.rows();
  auto locate = [m](double v, Eigen::Index& i0, double& f) {
    const double u = v * static_cast<double>(m) - 0.5;
    if (u <= 0.0) {
      i0 = 0;
      f = 0.0;
    } else if (u >= static_cast<double>(m - 1)) {
      i0 = m - 2;
      f = 1.0;
    } else {
      i0 = static_cast<Eigen::Index>(u);
      f = u - static_cast<double>(i0);
    }
  };
  if (m == 1) return t(0, 0);
  Eigen::Index i, j;
  double fx, fy;
  locate(x, i, fx);
  locate(y, j, fy);
  const double c0 = t(i, j) * (1.0 - fy) + t(i, j + 1) * fy;
  const double c1 = t(i + 1, j) * (1.0 - fy) + t(i + 1, j + 1) * fy;
  return c0 * (1.0 - fx) + c1 * fx;
}

}  // namespace

CostSpec CostSpec::quadratic(double beta) {
  check_beta(beta);
  return {Kind::quadratic, beta, Smoothness::c2, {}, {}};
}

CostSpec CostSpec::cosine(double beta) {
  check_beta(beta);
  return {Kind::cosine, beta, Smoothness::c2, {}, {}};
}

CostSpec CostSpec::footrule(double beta) {
  check_beta(beta);
  return {Kind::footrule, beta, Smoothness::non_c2, {}, {}};
}

CostSpec CostSpec::tabulated(const std::string& path, double beta) {
  check_beta(beta);
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cost table: cannot open " + path);
  Eigen::Index m = 0;
  if (!(in >> m) || m < 1) {
    throw std::invalid_argument("cost table: bad header in " + path);
  }
  Eigen::MatrixXd t(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (!(in >> t(i, j))) {
        throw std::invalid_argument("cost table: truncated data in " + path);
      }
    }
  }
  if (!t.allFinite() || t.minCoeff() < 0.0) {
    throw std::invalid_argument("cost table: entries must be finite and >= 0");
  }
  // enforce symmetry up front; everything downstream relies on it
  t = ((t + t.transpose()) / 2.0).eval();
  CostSpec spec{Kind::tabulated, beta, Smoothness::non_c2, std::move(t), path};
  return spec;
}

double evaluate(const CostSpec& cost, double x, double y) {
  check_domain(x, y);
  // |x-y| keeps the builtins bit-exactly symmetric in (x,y)
  const double d = std::abs(x - y);
  switch (cost.kind) {
    case Kind::quadratic:
      return cost.beta * d * d;
    case Kind::cosine:
      return cost.beta * (1.0 - std::cos(2.0 * std::numbers::pi * d));
    case Kind::footrule:
      return cost.beta * d;
    case Kind::tabulated:
      return cost.beta * interpolate_table(cost.table, x, y);
  }
  throw std::invalid_argument("cost: unknown kind");
}

namespace {

// max |c(t+h,u) - 2c(t,u) + c(t-h,u)| / h^2 over interior grid points, both axes
double second_difference_estimate(const CostSpec& cost, int g) {
  const double h = 1.0 / g;
  double worst = 0.0;
  auto node = [g](int i) { return (i + 0.5) / g; };
  for (int i = 1; i + 1 < g; ++i) {
    for (int j = 0; j < g; ++j) {
      const double u = node(j);
      const double dxx =
          evaluate(cost, node(i + 1), u) - 2.0 * evaluate(cost, node(i), u) +
          evaluate(cost, node(i - 1), u);
      const double dyy =
          evaluate(cost, u, node(i + 1)) - 2.0 * evaluate(cost, u, node(i)) +
          evaluate(cost, u, node(i - 1));
      worst = std::max({worst, std::abs(dxx), std::abs(dyy)});
    }
  }
  return worst / (h * h);
}

}  // namespace

ValidationReport validate_assumptions(const CostSpec& cost, int grid_points) {
  if (grid_points < 4) {
    throw std::invalid_argument("validate_assumptions: grid_points must be >= 4");
  }
  ValidationReport report;
  const int g = grid_points;
  for (int i = 0; i < g; ++i) {
    const double x = (i + 0.5) / g;
    report.max_diagonal = std::max(report.max_diagonal, std::abs(evaluate(cost, x, x)));
    for (int j = 0; j < g; ++j) {
      const double y = (j + 0.5) / g;
      const double cxy = evaluate(cost, x, y);
      report.max_asymmetry =
          std::max(report.max_asymmetry, std::abs(cxy - evaluate(cost, y, x)));
      report.max_reflection =
          std::max(report.max_reflection, std::abs(cxy - evaluate(cost, 1.0 - x, 1.0 - y)));
    }
  }
  const double coarse = second_difference_estimate(cost, g);
  const double fine = second_difference_estimate(cost, 2 * g);
  report.second_difference = fine;
  report.second_difference_growth = coarse > 0.0 ? fine / coarse : 1.0;
  report.smoothness_warning =
      cost.smoothness == Smoothness::non_c2 || report.second_difference_growth > 1.5;
  return report;
}

std::string kind_name(Kind kind) {
  switch (kind) {
    case Kind::quadratic: return "quadratic";
    case Kind::cosine: return "cosine";
    case Kind::footrule: return "foot-rule";
    case Kind::tabulated: return "tabulated";
  }
  return "unknown";
}

Kind kind_from_name(const std::string& name) {
  if (name == "quadratic") return Kind::quadratic;
  if (name == "cosine") return Kind::cosine;
  if (name == "foot-rule" || name == "footrule") return Kind::footrule;
  if (name == "tabulated") return Kind::tabulated;
  throw std::invalid_argument("cost: unknown kind name '" + name + "'");
}

}  // namespace mallows::costs
