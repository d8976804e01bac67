#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "colayers/apps/grid.hpp"
#include "test_support.hpp"

using namespace colayers;
using namespace colayers::apps;

TEST_CASE("grid generator is deterministic per seed") {
  GridGeneratorConfig cfg;
  cfg.count = 4;
  cfg.k = 5;
  cfg.seed = 7;
  const auto a = generate_grid_instances(cfg);
  const auto b = generate_grid_instances(cfg);
  REQUIRE(a.size() == 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].features == b[i].features);
    CHECK(a[i].theta_bar == b[i].theta_bar);
    CHECK(a[i].y_bar == b[i].y_bar);
  }
  cfg.seed = 8;
  CHECK(generate_grid_instances(cfg)[0].features != a[0].features);
}

TEST_CASE("grid instances: negative costs and optimal labels") {
  for (Connectivity c : {Connectivity::four, Connectivity::eight, Connectivity::acyclic}) {
    GridGeneratorConfig cfg;
    cfg.count = 6;
    cfg.k = 4;
    cfg.noise = 0.3;
    cfg.connectivity = c;
    for (const GridInstance& inst : generate_grid_instances(cfg)) {
      CHECK(inst.theta_bar.maxCoeff() < 0.0);
      CHECK(is_valid_grid_path(inst.grid, inst.y_bar));
      const auto paths = testing::grid_path_vertices(inst.grid);
      CHECK(inst.theta_bar.dot(inst.y_bar) == doctest::Approx(testing::best_value(inst.theta_bar, paths)));
    }
  }
}

TEST_CASE("k = 2 grids have at most two four-connected paths") {
  GridGeneratorConfig cfg;
  cfg.k = 2;
  cfg.connectivity = Connectivity::four;
  const auto paths = testing::grid_path_vertices(GridGraph{2, 2, Connectivity::four});
  REQUIRE(paths.size() == 2);
  for (const GridInstance& inst : generate_grid_instances(cfg)) {
    CHECK(std::find(paths.begin(), paths.end(), inst.y_bar) != paths.end());
  }
}

TEST_CASE("path gap") {
  GridGeneratorConfig cfg;
  cfg.count = 3;
  cfg.k = 4;
  for (const GridInstance& inst : generate_grid_instances(cfg)) {
    CHECK(path_gap(inst, inst.y_bar) == 0.0);
    const auto paths = testing::grid_path_vertices(inst.grid);
    double worst_gap = -1.0;
    double worst_cost = -1.0;
    double gap_of_worst_cost = 0.0;
    for (const Vertex& v : paths) {
      const double g = path_gap(inst, v);
      CHECK(g >= 0.0);
      worst_gap = std::max(worst_gap, g);
      if (path_cost(inst.theta_bar, v) > worst_cost) {
        worst_cost = path_cost(inst.theta_bar, v);
        gap_of_worst_cost = g;
      }
    }
    CHECK(gap_of_worst_cost == worst_gap);
    CHECK_THROWS_AS(path_gap(inst, Vertex::Zero(16)), DataError);
  }
}

TEST_CASE("hidden model reproduces the costs without noise") {
  GridGeneratorConfig cfg;
  cfg.count = 2;
  cfg.k = 3;
  cfg.features = 4;
  const auto inst = generate_grid_instances(cfg);
  // theta_bar is -softplus of a linear score, so it is recoverable by a GLM
  // with the negative softplus activation: check the log-odds are linear.
  Matrix x(18, 4);
  Vector z(18);
  for (int i = 0; i < 2; ++i) {
    x.middleRows(i * 9, 9) = inst[static_cast<std::size_t>(i)].features;
    for (Index r = 0; r < 9; ++r) z[i * 9 + r] = std::log(std::expm1(-inst[static_cast<std::size_t>(i)].theta_bar[r]));
  }
  const Vector w = x.colPivHouseholderQr().solve(z);
  CHECK((x * w - z).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("grid training oracles and samples") {
  GridGraph acyclic{3, 3, Connectivity::acyclic};
  CHECK(grid_training_oracle(acyclic, false).sign_domain == SignDomain::any);
  CHECK(grid_training_oracle(acyclic, true).sign_domain == SignDomain::strictly_negative);
  GridGeneratorConfig cfg;
  cfg.count = 2;
  cfg.k = 3;
  const auto inst = generate_grid_instances(cfg);
  const auto samples = grid_samples(inst, false);
  REQUIRE(samples.size() == 2);
  CHECK(*samples[0].target_solution == inst[0].y_bar);
  CHECK(*samples[0].target_objective == inst[0].theta_bar);
  CHECK(samples[0].cost(inst[0].y_bar) == doctest::Approx(path_cost(inst[0].theta_bar, inst[0].y_bar)));
  CHECK(samples[0].gap(inst[0].theta_bar) == 0.0);
}
