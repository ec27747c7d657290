#include "mallows/serialize.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mallows::io {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  ordered_json j;
  in >> j;
  return j;
}

void write_json(const ordered_json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void save_bridge(const bridge::BridgeSolution& sol, const std::string& path) {
  ordered_json j;
  j["cost_kind"] = costs::kind_name(sol.cost.kind);
  j["beta"] = sol.cost.beta;
  if (sol.cost.kind == costs::Kind::tabulated) j["table_path"] = sol.cost.table_path;
  j["m"] = sol.m;
  j["tol"] = sol.tol;
  j["iterations"] = sol.iterations;
  j["residual"] = sol.residual;
  j["gamma0"] = sol.gamma0;
  j["a_values"] = to_std(sol.a_values);
  write_json(j, path);
}

bridge::BridgeSolution load_bridge(const std::string& path) {
  const ordered_json j = read_json(path);
  bridge::BridgeSolution sol;
  const auto kind = costs::kind_from_name(j.at("cost_kind").get<std::string>());
  const double beta = j.at("beta").get<double>();
  switch (kind) {
    case costs::Kind::quadratic: sol.cost = costs::CostSpec::quadratic(beta); break;
    case costs::Kind::cosine: sol.cost = costs::CostSpec::cosine(beta); break;
    case costs::Kind::footrule: sol.cost = costs::CostSpec::footrule(beta); break;
    case costs::Kind::tabulated:
      sol.cost = costs::CostSpec::tabulated(j.at("table_path").get<std::string>(), beta);
      break;
  }
  sol.m = j.at("m").get<int>();
  sol.tol = j.at("tol").get<double>();
  sol.iterations = j.at("iterations").get<int>();
  sol.residual = j.at("residual").get<double>();
  sol.gamma0 = j.at("gamma0").get<double>();
  sol.a_values = to_eigen(j.at("a_values").get<std::vector<double>>());
  if (sol.a_values.size() != sol.m) {
    throw std::runtime_error(path + ": a_values length does not match m");
  }
  sol.nodes.resize(sol.m);
  for (int i = 0; i < sol.m; ++i) sol.nodes[i] = (i + 0.5) / sol.m;
  return sol;
}

void save_spectrum(const spectral::Spectrum& spec, const std::string& path) {
  ordered_json j;
  j["m"] = spec.m;
  j["unit_eigenvalue_check"] = spec.unit_eigenvalue_check;
  j["eigenvalues"] = to_std(spec.eigenvalues);
  j["sigma2"] = spec.sigma2;
  j["fredholm_det"] = spec.fredholm_det;
  j["conjectured_C"] = spec.conjectured_C;
  j["lipschitz_estimates"] = to_std(spec.lipschitz_estimates);
  write_json(j, path);
}

spectral::Spectrum load_spectrum(const std::string& path) {
  const ordered_json j = read_json(path);
  spectral::Spectrum spec;
  spec.m = j.at("m").get<int>();
  spec.unit_eigenvalue_check = j.at("unit_eigenvalue_check").get<double>();
  spec.eigenvalues = to_eigen(j.at("eigenvalues").get<std::vector<double>>());
  spec.sigma2 = j.at("sigma2").get<double>();
  spec.fredholm_det = j.at("fredholm_det").get<double>();
  spec.conjectured_C = j.at("conjectured_C").get<double>();
  spec.lipschitz_estimates = to_eigen(j.at("lipschitz_estimates").get<std::vector<double>>());
  spec.retained = 0;
  while (spec.retained < spec.eigenvalues.size() &&
         std::abs(spec.eigenvalues[spec.retained]) >= spectral::kNoiseFloor) {
    ++spec.retained;
  }
  spec.gap_holds =
      spec.eigenvalues.size() == 0 || std::abs(spec.eigenvalues[0]) < 1.0 - 1e-10;
  return spec;
}

void save_eigenfunctions(const spectral::Spectrum& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  for (int l = 0; l < spec.retained; ++l) {
    for (int i = 0; i < spec.m; ++i) {
      if (i) out << ' ';
      out << spec.eigenfunctions(i, l);
    }
    out << '\n';
  }
}

void load_eigenfunctions(spectral::Spectrum& spec, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (static_cast<int>(row.size()) != spec.m) {
      throw std::runtime_error(path + ": eigenfunction length does not match m");
    }
    rows.push_back(std::move(row));
  }
  spec.eigenfunctions.resize(spec.m, static_cast<Eigen::Index>(rows.size()));
  for (Eigen::Index l = 0; l < spec.eigenfunctions.cols(); ++l) {
    for (int i = 0; i < spec.m; ++i) spec.eigenfunctions(i, l) = rows[l][i];
  }
}

void save_partition_csv(const std::vector<partition::PartitionPoint>& table,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  out << "n,method,D_n,L_n,scaled,mc_stderr,seed\n";
  for (const auto& p : table) {
    out << p.n << ',' << partition::method_name(p.method) << ',' << p.D_n << ','
        << p.L_n << ',' << p.scaled << ',';
    if (p.mc_stderr) out << *p.mc_stderr;
    out << ',';
    if (p.seed) out << *p.seed;
    out << '\n';
  }
}

}  // namespace mallows::io
