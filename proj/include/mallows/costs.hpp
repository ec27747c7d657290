#pragma once

#include <Eigen/Dense>
#include <string>

namespace mallows::costs {

enum class Kind { quadratic, cosine, footrule, tabulated };

// The theory behind the workbench assumes c is C^2; the foot rule and
// bilinear tables are admitted anyway and flagged.
enum class Smoothness { c2, non_c2 };

// A cost c(x,y) on the unit square: zero on the diagonal, symmetric,
// reflection-symmetric (c(x,y) = c(1-x,1-y)), nonnegative.
struct CostSpec {
  Kind kind = Kind::quadratic;
  double beta = 1.0;
  Smoothness smoothness = Smoothness::c2;
  Eigen::MatrixXd table;        // midpoint-grid samples, tabulated only
  std::string table_path;

  static CostSpec quadratic(double beta = 1.0);
  static CostSpec cosine(double beta = 1.0);
  static CostSpec footrule(double beta = 1.0);
  // Plain-text table: header line m, then m*m reals row-major, sampled on
  // the midpoint grid (i-1/2)/m. Symmetrized against its transpose at load.
  static CostSpec tabulated(const std::string& path, double beta = 1.0);
};

// c(x,y). Builtins: quadratic beta*(x-y)^2, cosine beta*(1-cos(2pi(x-y))),
// foot-rule beta*|x-y|. Throws std::domain_error off the unit square.
double evaluate(const CostSpec& cost, double x, double y);

struct ValidationReport {
  double max_diagonal = 0;        // max |c(x,x)|
  double max_asymmetry = 0;       // max |c(x,y) - c(y,x)|
  double max_reflection = 0;      // max |c(x,y) - c(1-x,1-y)|
  double second_difference = 0;   // max |second difference| / h^2, fine grid
  double second_difference_growth = 0;  // fine/coarse ratio; ~1 iff C^2
  bool smoothness_warning = false;
};

// Grid diagnostic for the four standing assumptions. The second-difference
// estimate is compared across two resolutions: for a C^2 cost it stabilizes,
// for a diagonal kink it scales with the grid. Never throws.
ValidationReport validate_assumptions(const CostSpec& cost, int grid_points);

std::string kind_name(Kind kind);
Kind kind_from_name(const std::string& name);

}  // namespace mallows::costs
