#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mallows/bridge.hpp"
#include "mallows/costs.hpp"
#include "mallows/partition.hpp"
#include "mallows/series.hpp"
#include "mallows/spectral.hpp"

namespace mallows::harness {

// Everything one run needs; also the flat key=value config-file schema
// (keys match the CLI flag names).
struct RunConfig {
  costs::Kind cost_kind = costs::Kind::quadratic;
  double beta = 1.0;
  std::string table_path;

  int grid_m = 512;
  double tol = 1e-12;
  int max_iter = 100000;

  int n_min = 4;
  int n_max = 14;
  partition::Method method = partition::Method::ryser;
  long samples = 1000000;
  std::uint64_t seed = 12345;
  int ryser_cap = partition::kRyserCapDefault;

  int K = 24;
  int L = 6;

  bool refine_check = true;
  std::string out_dir = "out";

  std::vector<std::string> warnings;  // filled by validate()

  costs::CostSpec make_cost() const;
  // Normalizes (odd K is rounded down with a warning) and throws
  // std::invalid_argument on hard violations (caps, ranges).
  void validate();
};

// "quadratic" | "cosine" | "foot-rule" | "table:<path>"
void parse_cost_token(const std::string& token, RunConfig& config);
std::string cost_token(const RunConfig& config);

// key = value per line, '#' comments, unknown keys rejected
RunConfig load_config_file(const std::string& path);

enum class FitModel { inverse_n, inverse_n_squared };

struct FitResult {
  FitModel model = FitModel::inverse_n;
  double C_fit = 0.0;
  Eigen::VectorXd coefficients;  // [C, c1] or [C, c1, c2]
  double rms_residual = 0.0;
};

// Least squares of D_n against 1, 1/n (, 1/n^2). Needs >= 4 points with
// distinct n; throws NumericalError on a rank-deficient design.
FitResult fit_limit(const std::vector<std::pair<int, double>>& points, FitModel model);

struct SeriesChecks {
  double dL_closed_form = 1.0;
  double closed_form_rel_diff = 0.0;  // vs conjectured_C
  double dKL_value = 1.0;
  int K_used = 0;
  int L_used = 0;
  bool hermite_identity_ok = true;  // H_{2b}(0) = (-1)^b (2b-1)!!, b <= 12
  int dnK_n = 0;                    // 0 = check skipped
  double dnK_value = 0.0;
  double dnK_Dn = 0.0;
  double dnK_rel_diff = 0.0;
};

struct RefineChecks {  // half-grid sensitivity pass
  int m_half = 0;
  double gamma0_half = 0.0;
  double gamma0_diff = 0.0;
  double fredholm_det_half = 0.0;
  double fredholm_det_diff = 0.0;
  double lipschitz_max_rel_change = 0.0;  // leading eigenpairs
  bool lipschitz_stable = false;          // drift below 20%
};

struct VerificationReport {
  RunConfig config;
  bridge::BridgeSolution sol;
  spectral::Spectrum spectrum;
  std::vector<partition::PartitionPoint> table;

  double gamma0_potential = 0.0;
  double gamma0_quadrature = 0.0;
  double riemann_gap_10 = 0.0;
  double riemann_gap_100 = 0.0;
  costs::ValidationReport cost_report;
  SeriesChecks series;
  std::optional<RefineChecks> refine;

  FitResult fit1;  // C + c1/n
  FitResult fit2;  // C + c1/n + c2/n^2
  double relative_gap = 0.0;  // |C_fit1 - C_spectral| / C_spectral
  double model_spread = 0.0;  // |C_fit1 - C_fit2|
};

// bridge -> spectral -> partition -> series (+ optional half-grid pass),
// then the 1/n extrapolation. Module errors are rethrown with a stage label.
// Conjecture disagreement is a report field, never an error.
VerificationReport run_verify(const RunConfig& config);

// Writes report.json, bridge.json, spectrum.json, eigenfunctions.txt,
// partition.csv and convergence.svg under out_dir.
void emit_outputs(const VerificationReport& report, const std::string& out_dir);

std::string report_to_json_string(const VerificationReport& report);

// D_n and e^{n Gamma0} L_n against 1/n, plus the horizontal line C.
void write_convergence_svg(const std::vector<partition::PartitionPoint>& table,
                           double C, const std::string& path);

}  // namespace mallows::harness
