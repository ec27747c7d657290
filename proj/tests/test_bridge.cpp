#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "mallows/bridge.hpp"
#include "mallows/errors.hpp"
#include "mallows/serialize.hpp"

using namespace mallows;
using costs::CostSpec;

TEST_SUITE_BEGIN("bridge");

TEST_CASE("zero cost: uniform independent coupling, exactly") {
  const auto sol = bridge::solve(CostSpec::quadratic(0.0), 64, 1e-12);
  CHECK(sol.iterations == 1);
  CHECK(sol.residual < 1e-14);
  CHECK(sol.a_values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(sol.gamma0 == 0.0);
  CHECK(bridge::potential_at(sol, 0.37) == 0.0);
  CHECK(bridge::density(sol, 0.1, 0.9) == 1.0);
  const auto [g1, g2] = bridge::gamma0_two_ways(sol);
  CHECK(g1 == 0.0);
  CHECK(std::abs(g2) < 1e-15);
  for (int n : {1, 7, 40}) CHECK(bridge::riemann_gap(sol, n) == 0.0);
}

TEST_CASE("quadratic beta=1: gamma0 pinned by grid refinement") {
  const auto sol = bridge::solve(CostSpec::quadratic(1.0), 512, 1e-12);
  CHECK(sol.residual < 1e-11);
  // 0.152920947900 comes from an m=1024 run; m=512 vs m=1024 differ by 4.0e-7
  CHECK(std::abs(sol.gamma0 - 0.152920947900) < 1e-6);
}

TEST_CASE("converged potential is reflection-symmetric") {
  const auto sol = bridge::solve(CostSpec::quadratic(1.0), 512, 1e-12);
  const int m = sol.m;
  double worst = 0.0;
  for (int i = 0; i < m; ++i) {
    worst = std::max(worst, std::abs(sol.a_values[i] - sol.a_values[m - 1 - i]));
  }
  CHECK(worst < 1e-10);
  // off-grid evaluation inherits the symmetry
  for (double x : {0.08, 0.21, 0.47}) {
    CHECK(std::abs(bridge::potential_at(sol, x) - bridge::potential_at(sol, 1.0 - x)) <
          1e-10);
  }
}

TEST_CASE("potential_at agrees with a_values at the nodes") {
  const auto sol = bridge::solve(CostSpec::quadratic(1.0), 128, 1e-12);
  double worst = 0.0;
  for (int i = 0; i < sol.m; i += 7) {
    worst = std::max(worst,
                     std::abs(bridge::potential_at(sol, sol.nodes[i]) - sol.a_values[i]));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("density is bit-symmetric and has uniform row means") {
  const auto sol = bridge::solve(CostSpec::quadratic(1.0), 256, 1e-12);
  CHECK(bridge::density(sol, 0.2, 0.7) == bridge::density(sol, 0.7, 0.2));
  CHECK(bridge::density(sol, 0.0, 1.0) == bridge::density(sol, 1.0, 0.0));
  const Eigen::MatrixXd rho = bridge::density_matrix(sol, sol.nodes);
  CHECK((rho - rho.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(rho.minCoeff() > 0.0);
  const Eigen::VectorXd row_means = rho.rowwise().mean();
  CHECK((row_means.array() - 1.0).abs().maxCoeff() < 1e-10);
}

TEST_CASE("gamma0 two ways agree at the fixed point") {
  for (double beta : {0.5, 1.0, 2.0}) {
    const auto sol = bridge::solve(CostSpec::quadratic(beta), 256, 1e-12);
    const auto [g1, g2] = bridge::gamma0_two_ways(sol);
    CHECK(std::abs(g1 - g2) < 1e-6);
    CHECK(g1 == sol.gamma0);
  }
}

TEST_CASE("gamma0 is grid-stable for smooth costs") {
  for (const auto& cost : {CostSpec::quadratic(1.0), CostSpec::cosine(1.0)}) {
    const double g_m = bridge::solve(cost, 128, 1e-12).gamma0;
    const double g_2m = bridge::solve(cost, 256, 1e-12).gamma0;
    CHECK(std::abs(g_m - g_2m) < 1e-5);
  }
}

TEST_CASE("riemann gap decays like the midpoint-vs-endpoint defect") {
  const auto sol = bridge::solve(CostSpec::quadratic(1.0), 512, 1e-12);
  const double g10 = bridge::riemann_gap(sol, 10);
  const double g40 = bridge::riemann_gap(sol, 40);
  const double g100 = bridge::riemann_gap(sol, 100);
  CHECK(std::abs(g40) < std::abs(g10));
  CHECK(std::abs(g100) < std::abs(g40));
  // measured decay is ~1/n (ratio 0.102 at n=100 vs n=10); 0.15 leaves margin
  CHECK(std::abs(g100) < 0.15 * std::abs(g10) + 1e-8);
}

TEST_CASE("solver is deterministic") {
  const auto a = bridge::solve(CostSpec::cosine(1.3), 128, 1e-12);
  const auto b = bridge::solve(CostSpec::cosine(1.3), 128, 1e-12);
  CHECK(a.iterations == b.iterations);
  CHECK((a.a_values - b.a_values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("iteration limit carries the last residual") {
  try {
    bridge::solve(CostSpec::quadratic(1.0), 64, 1e-12, 2);
    FAIL("expected IterationLimitError");
  } catch (const IterationLimitError& e) {
    CHECK(e.iterations == 2);
    CHECK(e.residual > 0.0);
  }
}

TEST_CASE("argument validation") {
  const auto sol = bridge::solve(CostSpec::quadratic(1.0), 64, 1e-12);
  CHECK_THROWS_AS(bridge::solve(CostSpec::quadratic(1.0), 4), std::invalid_argument);
  CHECK_THROWS_AS(bridge::potential_at(sol, 1.5), std::domain_error);
  CHECK_THROWS_AS(bridge::density(sol, 0.5, -0.2), std::domain_error);
  CHECK_THROWS_AS(bridge::riemann_gap(sol, 0), std::invalid_argument);
}

TEST_CASE("solution file round-trips") {
  const auto sol = bridge::solve(CostSpec::cosine(0.7), 64, 1e-12);
  const std::string path = "test_bridge_roundtrip.json";
  io::save_bridge(sol, path);
  const auto back = io::load_bridge(path);
  CHECK(back.m == sol.m);
  CHECK(back.tol == sol.tol);
  CHECK(back.iterations == sol.iterations);
  CHECK(back.residual == sol.residual);
  CHECK(back.gamma0 == sol.gamma0);
  CHECK(back.cost.kind == sol.cost.kind);
  CHECK(back.cost.beta == sol.cost.beta);
  CHECK((back.a_values - sol.a_values).cwiseAbs().maxCoeff() == 0.0);
  CHECK(bridge::density(back, 0.3, 0.8) == bridge::density(sol, 0.3, 0.8));
  std::remove(path.c_str());
}

TEST_CASE("tabulated solution round-trips through the table path") {
  const std::string table = "test_bridge_table.txt";
  {
    std::ofstream out(table);
    out.precision(17);
    const int m = 16;
    out << m << "\n";
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        const double d = (i - j) / static_cast<double>(m);
        out << d * d << (j + 1 == m ? "\n" : " ");
      }
    }
  }
  const auto sol = bridge::solve(costs::CostSpec::tabulated(table, 1.0), 64, 1e-12);
  const std::string path = "test_bridge_tab.json";
  io::save_bridge(sol, path);
  const auto back = io::load_bridge(path);
  CHECK(back.cost.kind == costs::Kind::tabulated);
  CHECK(back.cost.table_path == table);
  CHECK(bridge::density(back, 0.25, 0.6) == bridge::density(sol, 0.25, 0.6));
  std::remove(path.c_str());
  std::remove(table.c_str());
}

TEST_SUITE_END();
