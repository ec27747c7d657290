#include "mallows/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "mallows/errors.hpp"
#include "mallows/serialize.hpp"

namespace mallows::harness {

namespace {

using ordered_json = nlohmann::ordered_json;

[[noreturn]] void fail_stage(const std::string& stage, const std::exception& e) {
  throw std::runtime_error("stage " + stage + ": " + e.what());
}

}  // namespace

costs::CostSpec RunConfig::make_cost() const {
  switch (cost_kind) {
    case costs::Kind::quadratic: return costs::CostSpec::quadratic(beta);
    case costs::Kind::cosine: return costs::CostSpec::cosine(beta);
    case costs::Kind::footrule: return costs::CostSpec::footrule(beta);
    case costs::Kind::tabulated: return costs::CostSpec::tabulated(table_path, beta);
  }
  throw std::invalid_argument("config: unknown cost kind");
}

void RunConfig::validate() {
  if (grid_m < 8) throw std::invalid_argument("config: grid must be >= 8");
  if (!(tol > 0.0)) throw std::invalid_argument("config: tol must be > 0");
  if (max_iter < 1) throw std::invalid_argument("config: max_iter must be >= 1");
  if (n_min < 1 || n_max < n_min) {
    throw std::invalid_argument("config: need 1 <= n-min <= n-max");
  }
  const int cap = method == partition::Method::brute ? partition::kBruteCap
                  : method == partition::Method::ryser ? ryser_cap
                                                       : 62;
  if (n_max > cap) {
    throw std::invalid_argument("config: n-max exceeds the " +
                                partition::method_name(method) + " cap (" +
                                std::to_string(cap) + ")");
  }
  if (method == partition::Method::monte_carlo && samples < 1000) {
    throw std::invalid_argument("config: samples must be >= 1000");
  }
  if (K < 0 || L < 0) throw std::invalid_argument("config: K and L must be >= 0");
  if (K % 2 == 1) {
    warnings.push_back("K rounded down to even: " + std::to_string(K) + " -> " +
                       std::to_string(K - 1));
    K -= 1;
  }
  if (!(beta >= 0.0)) throw std::invalid_argument("config: beta must be >= 0");
}

void parse_cost_token(const std::string& token, RunConfig& config) {
  if (token.rfind("table:", 0) == 0) {
    config.cost_kind = costs::Kind::tabulated;
    config.table_path = token.substr(6);
    if (config.table_path.empty()) {
      throw std::invalid_argument("config: table: needs a path");
    }
    return;
  }
  config.cost_kind = costs::kind_from_name(token);
  config.table_path.clear();
}

std::string cost_token(const RunConfig& config) {
  if (config.cost_kind == costs::Kind::tabulated) return "table:" + config.table_path;
  return costs::kind_name(config.cost_kind);
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  RunConfig config;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string{};
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    line = strip(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": expected key = value");
    }
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    try {
      if (key == "cost") parse_cost_token(value, config);
      else if (key == "beta") config.beta = std::stod(value);
      else if (key == "grid") config.grid_m = std::stoi(value);
      else if (key == "tol") config.tol = std::stod(value);
      else if (key == "max-iter") config.max_iter = std::stoi(value);
      else if (key == "n-min") config.n_min = std::stoi(value);
      else if (key == "n-max") config.n_max = std::stoi(value);
      else if (key == "method") config.method = partition::method_from_name(value);
      else if (key == "samples") config.samples = std::stol(value);
      else if (key == "seed") config.seed = std::stoull(value);
      else if (key == "ryser-cap") config.ryser_cap = std::stoi(value);
      else if (key == "K") config.K = std::stoi(value);
      else if (key == "L") config.L = std::stoi(value);
      else if (key == "refine") config.refine_check = (value == "true" || value == "1");
      else if (key == "out") config.out_dir = value;
      else
        throw std::invalid_argument("unknown key '" + key + "'");
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return config;
}

FitResult fit_limit(const std::vector<std::pair<int, double>>& points, FitModel model) {
  if (points.size() < 4) {
    throw std::invalid_argument("fit_limit: need at least 4 points");
  }
  std::set<int> distinct;
  for (const auto& [n, d] : points) {
    if (n < 1) throw std::invalid_argument("fit_limit: n must be >= 1");
    distinct.insert(n);
  }
  if (distinct.size() != points.size()) {
    throw std::invalid_argument("fit_limit: n values must be distinct");
  }

  const auto rows = static_cast<Eigen::Index>(points.size());
  const Eigen::Index cols = model == FitModel::inverse_n ? 2 : 3;
  Eigen::MatrixXd design(rows, cols);
  Eigen::VectorXd rhs(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double inv_n = 1.0 / points[i].first;
    design(i, 0) = 1.0;
    design(i, 1) = inv_n;
    if (cols == 3) design(i, 2) = inv_n * inv_n;
    rhs[i] = points[i].second;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < cols) {
    throw NumericalError("fit_limit: rank-deficient design matrix");
  }
  FitResult fit;
  fit.model = model;
  fit.coefficients = qr.solve(rhs);
  fit.C_fit = fit.coefficients[0];
  fit.rms_residual =
      std::sqrt((design * fit.coefficients - rhs).squaredNorm() / static_cast<double>(rows));
  return fit;
}

VerificationReport run_verify(const RunConfig& input_config) {
  VerificationReport report;
  report.config = input_config;
  report.config.validate();
  const RunConfig& config = report.config;

  costs::CostSpec cost;
  try {
    cost = config.make_cost();
    report.cost_report = costs::validate_assumptions(cost, 64);
  } catch (const std::exception& e) {
    fail_stage("costs", e);
  }

  try {
    report.sol = bridge::solve(cost, config.grid_m, config.tol, config.max_iter);
    std::tie(report.gamma0_potential, report.gamma0_quadrature) =
        bridge::gamma0_two_ways(report.sol);
    report.riemann_gap_10 = bridge::riemann_gap(report.sol, 10);
    report.riemann_gap_100 = bridge::riemann_gap(report.sol, 100);
  } catch (const std::exception& e) {
    fail_stage("bridge", e);
  }

  try {
    report.spectrum =
        spectral::eigendecompose(spectral::center_kernel(report.sol), config.grid_m);
  } catch (const std::exception& e) {
    fail_stage("spectral", e);
  }

  try {
    report.table = partition::scaled_sequence(report.sol, config.n_min, config.n_max,
                                              config.method,
                                              {config.samples, config.seed},
                                              config.ryser_cap);
  } catch (const std::exception& e) {
    fail_stage("partition", e);
  }

  try {
    SeriesChecks& sc = report.series;
    const Eigen::VectorXd lambdas = spectral::retained_eigenvalues(report.spectrum);
    sc.dL_closed_form = series::dL_closed_form(lambdas).value;
    sc.closed_form_rel_diff =
        std::abs(sc.dL_closed_form - report.spectrum.conjectured_C) /
        report.spectrum.conjectured_C;
    sc.K_used = config.K;
    sc.L_used = std::min<int>(config.L, report.spectrum.retained);
    sc.dKL_value = series::dKL_limit(lambdas.head(sc.L_used), sc.K_used).value;
    sc.hermite_identity_ok = true;
    for (int b = 0; b <= 12; ++b) {
      const std::int64_t expected =
          (b % 2 == 0 ? 1 : -1) * series::odd_double_factorial(b);
      if (series::hermite_zero(2 * b) != expected) sc.hermite_identity_ok = false;
    }
    if (config.method != partition::Method::monte_carlo && config.n_max >= 3) {
      const int n_check = std::min(6, config.n_max);
      const Eigen::MatrixXd rho =
          bridge::density_matrix(report.sol, partition::evaluation_points(n_check));
      sc.dnK_n = n_check;
      sc.dnK_value = series::dnK_exact(rho, n_check, n_check).value;
      for (const auto& p : report.table) {
        if (p.n == n_check) sc.dnK_Dn = p.D_n;
      }
      if (sc.dnK_Dn == 0.0) {
        sc.dnK_Dn = partition::compute_Dn(report.sol, n_check, config.method,
                                          config.ryser_cap)
                        .D_n;
      }
      sc.dnK_rel_diff = std::abs(sc.dnK_value - sc.dnK_Dn) / sc.dnK_Dn;
    }
  } catch (const std::exception& e) {
    fail_stage("series", e);
  }

  if (config.refine_check && config.grid_m / 2 >= 8) {
    try {
      RefineChecks rc;
      rc.m_half = config.grid_m / 2;
      const bridge::BridgeSolution half =
          bridge::solve(cost, rc.m_half, config.tol, config.max_iter);
      rc.gamma0_half = half.gamma0;
      rc.gamma0_diff = std::abs(half.gamma0 - report.sol.gamma0);
      const spectral::Spectrum shalf =
          spectral::eigendecompose(spectral::center_kernel(half), rc.m_half);
      rc.fredholm_det_half = shalf.fredholm_det;
      rc.fredholm_det_diff = std::abs(shalf.fredholm_det - report.spectrum.fredholm_det);
      const int leading = std::min({3, report.spectrum.retained, shalf.retained});
      rc.lipschitz_max_rel_change = 0.0;
      for (int l = 0; l < leading; ++l) {
        const double a = report.spectrum.lipschitz_estimates[l];
        const double b = shalf.lipschitz_estimates[l];
        if (a > 0.0) {
          rc.lipschitz_max_rel_change =
              std::max(rc.lipschitz_max_rel_change, std::abs(a - b) / a);
        }
      }
      rc.lipschitz_stable = rc.lipschitz_max_rel_change < 0.2;
      report.refine = rc;
    } catch (const std::exception& e) {
      fail_stage("refine", e);
    }
  }

  try {
    // re-verify the D_n / L_n identity on the assembled rows
    for (const auto& p : report.table) {
      const double sum_a =
          bridge::potential_at(report.sol, partition::evaluation_points(p.n)).sum();
      if (std::abs(p.D_n - p.L_n * std::exp(-2.0 * sum_a)) > 1e-10 * p.D_n) {
        throw NumericalError("partition row n = " + std::to_string(p.n) +
                             " violates D_n = L_n exp(-2 sum a)");
      }
    }
    std::vector<std::pair<int, double>> points;
    points.reserve(report.table.size());
    for (const auto& p : report.table) points.emplace_back(p.n, p.D_n);
    report.fit1 = fit_limit(points, FitModel::inverse_n);
    report.fit2 = fit_limit(points, FitModel::inverse_n_squared);
    report.relative_gap = std::abs(report.fit1.C_fit - report.spectrum.conjectured_C) /
                          report.spectrum.conjectured_C;
    report.model_spread = std::abs(report.fit1.C_fit - report.fit2.C_fit);
  } catch (const std::exception& e) {
    fail_stage("fit", e);
  }

  return report;
}

namespace {

ordered_json config_to_json(const RunConfig& c) {
  ordered_json j;
  j["cost"] = cost_token(c);
  j["beta"] = c.beta;
  j["grid"] = c.grid_m;
  j["tol"] = c.tol;
  j["max_iter"] = c.max_iter;
  j["n_min"] = c.n_min;
  j["n_max"] = c.n_max;
  j["method"] = partition::method_name(c.method);
  j["samples"] = c.samples;
  j["seed"] = c.seed;
  j["ryser_cap"] = c.ryser_cap;
  j["K"] = c.K;
  j["L"] = c.L;
  j["refine"] = c.refine_check;
  j["warnings"] = c.warnings;
  return j;
}

ordered_json fit_to_json(const FitResult& f) {
  ordered_json j;
  j["model"] = f.model == FitModel::inverse_n ? "C + c1/n" : "C + c1/n + c2/n^2";
  j["C_fit"] = f.C_fit;
  std::vector<double> coeffs(f.coefficients.data(),
                             f.coefficients.data() + f.coefficients.size());
  j["coefficients"] = coeffs;
  j["rms_residual"] = f.rms_residual;
  return j;
}

ordered_json report_to_json(const VerificationReport& r) {
  ordered_json j;
  j["config"] = config_to_json(r.config);

  ordered_json jb;
  jb["gamma0_potential"] = r.gamma0_potential;
  jb["gamma0_quadrature"] = r.gamma0_quadrature;
  jb["iterations"] = r.sol.iterations;
  jb["residual"] = r.sol.residual;
  jb["riemann_gap_n10"] = r.riemann_gap_10;
  jb["riemann_gap_n100"] = r.riemann_gap_100;
  j["bridge"] = jb;

  ordered_json jc;
  jc["max_diagonal"] = r.cost_report.max_diagonal;
  jc["max_asymmetry"] = r.cost_report.max_asymmetry;
  jc["max_reflection"] = r.cost_report.max_reflection;
  jc["second_difference"] = r.cost_report.second_difference;
  jc["second_difference_growth"] = r.cost_report.second_difference_growth;
  jc["smoothness_warning"] = r.cost_report.smoothness_warning;
  j["cost_assumptions"] = jc;

  ordered_json js;
  js["unit_eigenvalue_check"] = r.spectrum.unit_eigenvalue_check;
  js["sigma2"] = r.spectrum.sigma2;
  js["fredholm_det"] = r.spectrum.fredholm_det;
  js["conjectured_C"] = r.spectrum.conjectured_C;
  js["retained"] = r.spectrum.retained;
  js["gap_holds"] = r.spectrum.gap_holds;
  if (r.spectrum.sigma2 >= 1.0 - 1e-12) {
    js["note"] = "all centered eigenvalues at the noise floor: gap = 1 boundary case";
  }
  std::vector<double> lead;
  for (int l = 0; l < std::min(10, r.spectrum.retained); ++l) {
    lead.push_back(r.spectrum.eigenvalues[l]);
  }
  js["leading_eigenvalues"] = lead;
  j["spectral"] = js;

  ordered_json jt = ordered_json::array();
  for (const auto& p : r.table) {
    ordered_json row;
    row["n"] = p.n;
    row["method"] = partition::method_name(p.method);
    row["D_n"] = p.D_n;
    row["L_n"] = p.L_n;
    row["scaled"] = p.scaled;
    if (p.mc_stderr) row["mc_stderr"] = *p.mc_stderr;
    if (p.seed) row["seed"] = *p.seed;
    jt.push_back(row);
  }
  j["partition"] = jt;

  ordered_json jse;
  jse["dL_closed_form"] = r.series.dL_closed_form;
  jse["closed_form_rel_diff"] = r.series.closed_form_rel_diff;
  jse["dKL_value"] = r.series.dKL_value;
  jse["K_used"] = r.series.K_used;
  jse["L_used"] = r.series.L_used;
  jse["hermite_identity_ok"] = r.series.hermite_identity_ok;
  if (r.series.dnK_n > 0) {
    jse["dnK_n"] = r.series.dnK_n;
    jse["dnK_value"] = r.series.dnK_value;
    jse["dnK_Dn"] = r.series.dnK_Dn;
    jse["dnK_rel_diff"] = r.series.dnK_rel_diff;
  }
  j["series"] = jse;

  if (r.refine) {
    ordered_json jr;
    jr["m_half"] = r.refine->m_half;
    jr["gamma0_half"] = r.refine->gamma0_half;
    jr["gamma0_diff"] = r.refine->gamma0_diff;
    jr["fredholm_det_half"] = r.refine->fredholm_det_half;
    jr["fredholm_det_diff"] = r.refine->fredholm_det_diff;
    jr["lipschitz_max_rel_change"] = r.refine->lipschitz_max_rel_change;
    jr["lipschitz_stable"] = r.refine->lipschitz_stable;
    j["grid_sensitivity"] = jr;
  }

  j["fit_inverse_n"] = fit_to_json(r.fit1);
  j["fit_inverse_n_squared"] = fit_to_json(r.fit2);

  ordered_json jv;
  jv["C_spectral"] = r.spectrum.conjectured_C;
  jv["C_fit"] = r.fit1.C_fit;
  jv["relative_gap"] = r.relative_gap;
  jv["model_spread"] = r.model_spread;
  j["verdict"] = jv;

  ordered_json ja;
  ja["spectral_gap_holds"] = r.spectrum.gap_holds;
  if (r.refine) {
    ja["lipschitz_stable"] = r.refine->lipschitz_stable;
  } else {
    ja["lipschitz_stable"] = nullptr;  // needs the half-grid pass
  }
  ja["cost_c2"] = !r.cost_report.smoothness_warning;
  j["assumptions"] = ja;

  return j;
}

}  // namespace

std::string report_to_json_string(const VerificationReport& report) {
  return report_to_json(report).dump(2) + "\n";
}

void write_convergence_svg(const std::vector<partition::PartitionPoint>& table, double C,
                           const std::string& path) {
  if (table.empty()) throw std::invalid_argument("svg: empty table");
  const double w = 640, h = 420, ml = 70, mr = 20, mt = 20, mb = 50;

  double xmax = 0, ymin = C, ymax = C;
  for (const auto& p : table) {
    xmax = std::max(xmax, 1.0 / p.n);
    ymin = std::min({ymin, p.D_n, p.scaled});
    ymax = std::max({ymax, p.D_n, p.scaled});
  }
  if (ymax == ymin) {
    ymax += 1e-9;
    ymin -= 1e-9;
  }
  const double pad = 0.08 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  auto X = [&](double inv_n) { return ml + inv_n / xmax * (w - ml - mr); };
  auto Y = [&](double v) { return h - mb - (v - ymin) / (ymax - ymin) * (h - mt - mb); };
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };

  auto polyline = [&](auto value_of) {
    std::string pts;
    for (auto it = table.rbegin(); it != table.rend(); ++it) {  // ascending 1/n
      pts += fmt(X(1.0 / it->n)) + "," + fmt(Y(value_of(*it))) + " ";
    }
    return pts;
  };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // reference line: the spectral constant C
  out << "  <line x1=\"" << fmt(X(0)) << "\" y1=\"" << fmt(Y(C)) << "\" x2=\""
      << fmt(X(xmax)) << "\" y2=\"" << fmt(Y(C))
      << "\" stroke=\"#999999\" stroke-dasharray=\"6,4\"/>\n";
  out << "  <polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\""
      << polyline([](const partition::PartitionPoint& p) { return p.D_n; }) << "\"/>\n";
  out << "  <polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\" points=\""
      << polyline([](const partition::PartitionPoint& p) { return p.scaled; }) << "\"/>\n";
  out << "  <text x=\"" << w / 2 << "\" y=\"" << h - 12
      << "\" text-anchor=\"middle\" font-size=\"13\">1/n</text>\n";
  out << "  <text x=\"16\" y=\"" << h / 2
      << "\" font-size=\"13\" transform=\"rotate(-90 16 " << h / 2
      << ")\" text-anchor=\"middle\">D_n (blue), e^(n Gamma0) L_n (red), C (dashed)</text>\n";
  out << "</svg>\n";
}

void emit_outputs(const VerificationReport& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + out_dir);

  const fs::path dir(out_dir);
  io::save_bridge(report.sol, (dir / "bridge.json").string());
  io::save_spectrum(report.spectrum, (dir / "spectrum.json").string());
  io::save_eigenfunctions(report.spectrum, (dir / "eigenfunctions.txt").string());
  io::save_partition_csv(report.table, (dir / "partition.csv").string());

  std::ofstream out(dir / "report.json");
  if (!out) throw std::runtime_error("cannot write report.json under " + out_dir);
  out << report_to_json_string(report);
  out.close();

  write_convergence_svg(report.table, report.spectrum.conjectured_C,
                        (dir / "convergence.svg").string());
}

}  // namespace mallows::harness
