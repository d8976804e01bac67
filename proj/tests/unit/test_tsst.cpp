#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "colayers/apps/tsst.hpp"
#include "test_support.hpp"

using namespace colayers;
using namespace colayers::apps;

namespace {

TsstInstance triangle(const Vector& c, const Matrix& d) {
  TsstInstance t;
  t.width = 0;
  t.graph.nodes = 3;
  t.graph.edges = {{0, 1}, {0, 2}, {1, 2}};
  t.first_stage = c;
  t.second_stage = d;
  return t;
}

// Optimum by enumerating first-stage forests and, per scenario, every
// spanning tree containing the forest.
double enumerated_optimum(const TsstInstance& inst) {
  const auto forests = testing::forest_vertices(inst.graph);
  const auto trees = testing::forest_vertices(inst.graph, true);
  double best = std::numeric_limits<double>::infinity();
  for (const Vertex& y : forests) {
    double total = inst.first_stage.dot(y);
    for (Index s = 0; s < inst.scenarios(); ++s) {
      double cheapest = std::numeric_limits<double>::infinity();
      for (const Vertex& t : trees) {
        if (((t - y).array() < 0.0).any()) continue;
        cheapest = std::min(cheapest, inst.second_stage.col(s).dot(t - y));
      }
      total += cheapest / static_cast<double>(inst.scenarios());
    }
    best = std::min(best, total);
  }
  return best;
}

}  // namespace

TEST_CASE("tsst generator") {
  const TsstInstance a = generate_tsst_instance(2, 3, 20.0, 9);
  CHECK(a.graph.nodes == 4);
  CHECK(a.edges() == 4);
  CHECK(a.scenarios() == 3);
  const TsstInstance b = generate_tsst_instance(4, 10, 35.0, 9);
  CHECK(b.edges() == 24);
  CHECK(b.first_stage.minCoeff() >= 0.0);
  CHECK(b.first_stage.maxCoeff() <= 20.0);
  CHECK(b.second_stage.minCoeff() >= 0.0);
  CHECK(b.second_stage.maxCoeff() <= 35.0);
  const TsstInstance c = generate_tsst_instance(4, 10, 35.0, 9);
  CHECK(b.first_stage == c.first_stage);
  CHECK(b.second_stage == c.second_stage);
  CHECK(generate_tsst_instance(4, 10, 35.0, 10).first_stage != b.first_stage);
  CHECK_THROWS_AS(generate_tsst_instance(1, 3, 20.0, 0), ConfigError);
  CHECK_THROWS_AS(generate_tsst_instance(3, 0, 20.0, 0), ConfigError);
}

TEST_CASE("tsst solution cost") {
  Matrix d(3, 1);
  d << 10, 2, 2;
  const TsstInstance t = triangle(Vector::LinSpaced(3, 1, 3), d);
  // y = {}, the scenario buys its MST {1, 2}
  const TsstSolution empty = second_stage_complete(t, Vertex::Zero(3));
  CHECK(empty.z.col(0) == Vector((Vector(3) << 0, 1, 1).finished()));
  CHECK(tsst_solution_cost(t, empty) == 4.0);
  Vertex y = Vertex::Zero(3);
  y[0] = 1.0;
  CHECK(tsst_solution_cost(t, second_stage_complete(t, y)) == 1.0 + 2.0);

  const TsstInstance g = generate_tsst_instance(3, 4, 20.0, 11);
  const Vertex all_first = kruskal_max_weight_spanning_tree(g.graph, Vector::Ones(g.edges()));
  const TsstSolution full = second_stage_complete(g, all_first);
  CHECK(full.z.isZero());
  CHECK(tsst_solution_cost(g, full) == doctest::Approx(g.first_stage.dot(all_first)));
  double mst_mean = 0.0;
  for (Index s = 0; s < g.scenarios(); ++s) {
    const Vertex tree = kruskal_max_weight_spanning_tree(g.graph, -g.second_stage.col(s));
    mst_mean += g.second_stage.col(s).dot(tree) / static_cast<double>(g.scenarios());
  }
  CHECK(tsst_solution_cost(g, second_stage_complete(g, Vertex::Zero(g.edges()))) == doctest::Approx(mst_mean));
}

TEST_CASE("tsst solution cost rejects infeasible solutions") {
  Matrix d(3, 1);
  d << 1, 1, 1;
  const TsstInstance t = triangle(Vector::Ones(3), d);
  TsstSolution cycle{Vertex::Ones(3), Matrix::Zero(3, 1)};
  CHECK_THROWS_AS(tsst_solution_cost(t, cycle), DataError);
  TsstSolution short_tree{Vertex::Zero(3), Matrix::Zero(3, 1)};
  short_tree.z(0, 0) = 1.0;
  CHECK_THROWS_AS(tsst_solution_cost(t, short_tree), DataError);
  TsstSolution doubled{Vertex::Zero(3), Matrix::Zero(3, 1)};
  doubled.y[0] = 1.0;
  doubled.z(0, 0) = 1.0;
  doubled.z(1, 0) = 1.0;
  CHECK_THROWS_AS(tsst_solution_cost(t, doubled), DataError);
  CHECK_THROWS_AS(second_stage_complete(t, Vertex::Ones(3)), DataError);
}

TEST_CASE("second stage completion is a spanning tree and optimal per scenario") {
  const TsstInstance g = generate_tsst_instance(2, 4, 20.0, 12);
  const auto trees = testing::forest_vertices(g.graph, true);
  for (const Vertex& y : testing::forest_vertices(g.graph)) {
    const TsstSolution sol = second_stage_complete(g, y);
    for (Index s = 0; s < g.scenarios(); ++s) {
      CHECK(is_spanning_tree(g.graph, y + sol.z.col(s)));
      double cheapest = std::numeric_limits<double>::infinity();
      for (const Vertex& t : trees) {
        if (((t - y).array() < 0.0).any()) continue;
        cheapest = std::min(cheapest, g.second_stage.col(s).dot(t - y));
      }
      CHECK(g.second_stage.col(s).dot(sol.z.col(s)) == doctest::Approx(cheapest));
    }
  }
}

TEST_CASE("brute force matches enumeration") {
  Matrix d(3, 1);
  d << 10, 2, 2;
  Vector c(3);
  c << 1, 5, 5;
  const TsstOptimum tri = tsst_brute_force(triangle(c, d));
  CHECK(tri.cost == 3.0);
  CHECK(tri.solution.y == Vertex((Vertex(3) << 1, 0, 0).finished()));
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const TsstInstance g = generate_tsst_instance(2, 3, 20.0 + 5.0 * static_cast<double>(seed), seed);
    CHECK(tsst_brute_force(g).cost == doctest::Approx(enumerated_optimum(g)));
  }
  CHECK_THROWS_AS(tsst_brute_force(generate_tsst_instance(4, 1, 20.0, 0)), ConfigError);
}

TEST_CASE("Lagrangian dual: value at zero, weak duality, supergradient") {
  std::mt19937_64 rng(13);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const TsstInstance g = generate_tsst_instance(2, 3, 30.0, seed);
    const double opt = tsst_brute_force(g).cost;
    CHECK(lagrangian_dual(g, Matrix::Zero(4, 3), 1.0).value == 0.0);
    for (int t = 0; t < 25; ++t) {
      Matrix th(4, 3), th2(4, 3);
      for (Index i = 0; i < th.size(); ++i) {
        th.data()[i] = std::uniform_real_distribution<double>(-30, 10)(rng);
        th2.data()[i] = std::uniform_real_distribution<double>(-30, 10)(rng);
      }
      const DualEvaluation a = lagrangian_dual(g, th, 1.0);
      const DualEvaluation b = lagrangian_dual(g, th2, 1.0);
      CHECK(a.value <= opt + 1e-9);
      CHECK(b.value <= a.value + (a.subgradient.cwiseProduct(th2 - th)).sum() + 1e-9);
      // the value is attained by the reported minimizers
      double recomputed = (g.first_stage + th.rowwise().mean()).dot(a.y);
      for (Index s = 0; s < 3; ++s) {
        const Vertex tree = a.y_scenario.col(s) +
                            kruskal_max_weight_spanning_tree(g.graph, -g.second_stage.col(s).cwiseMin(-th.col(s)))
                                .cwiseProduct(Vector::Ones(4) - a.y_scenario.col(s));
        CHECK(is_spanning_tree(g.graph, tree));
        recomputed += (g.second_stage.col(s).cwiseMin(-th.col(s))).dot(tree) / 3.0;
      }
      CHECK(a.value == doctest::Approx(recomputed));
    }
  }
  CHECK_THROWS_AS(lagrangian_dual(generate_tsst_instance(2, 1, 1, 0), Matrix::Zero(4, 1), 0.0), ConfigError);
  CHECK_THROWS_AS(lagrangian_dual(generate_tsst_instance(2, 1, 1, 0), Matrix::Zero(3, 1), 1.0), DimensionError);
}

TEST_CASE("Lagrangian heuristic") {
  const WeightedGraph g = make_grid_graph(3);
  const Index m = g.edge_count();
  CHECK(is_spanning_tree(g, lagrangian_heuristic(g, Matrix::Ones(m, 4))));
  CHECK(lagrangian_heuristic(g, Matrix::Zero(m, 4)).isZero());
  Matrix d(3, 1);
  d << 1, 1, 1;
  const TsstInstance t = triangle(Vector::Ones(3), d);
  Matrix votes(3, 3);
  votes << 1, 1, 0,
           1, 0, 0,
           1, 1, 1;
  CHECK(lagrangian_heuristic(t.graph, votes) == Vertex((Vertex(3) << 1, 0, 1).finished()));
}

TEST_CASE("Lagrangian ascent") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const TsstInstance g = generate_tsst_instance(2 + static_cast<Index>(seed % 2), 4, 25.0, seed);
    const LagrangianState st = lagrangian_ascent(g);
    const double opt = tsst_brute_force(g).cost;
    CHECK(st.lower <= opt + 1e-9);
    CHECK(st.upper >= opt - 1e-9);
    CHECK(st.upper == doctest::Approx(tsst_solution_cost(g, second_stage_complete(g, st.best_forest))));
    CHECK(std::is_sorted(st.lower_trace.begin(), st.lower_trace.end()));
    CHECK(st.relative_gap() <= 0.1);
  }
  // second-stage edges far more expensive: buy a c-MST up front
  TsstInstance g = generate_tsst_instance(3, 3, 20.0, 14);
  g.second_stage.array() += 1000.0;
  const LagrangianState st = lagrangian_ascent(g);
  const Vertex mst = kruskal_max_weight_spanning_tree(g.graph, -g.first_stage);
  CHECK(st.upper == doctest::Approx(g.first_stage.dot(mst)));
  CHECK(st.relative_gap() <= 1e-3);
  LagrangianConfig bad;
  bad.step0 = 0.0;
  CHECK_THROWS_AS(lagrangian_ascent(g, bad), ConfigError);
}

TEST_CASE("linear quantile") {
  CHECK(linear_quantile({5.0}, 0.0) == 5.0);
  CHECK(linear_quantile({5.0}, 0.7) == 5.0);
  CHECK(linear_quantile({1.0, 3.0}, 0.5) == 2.0);
  CHECK(linear_quantile({1.0, 3.0}, 0.25) == 1.5);
  CHECK(linear_quantile({1.0, 2.0, 4.0}, 1.0) == 4.0);
  CHECK(linear_quantile({1.0, 2.0, 4.0}, 0.75) == 3.0);
  CHECK_THROWS_AS(linear_quantile({}, 0.5), DataError);
}

TEST_CASE("tsst features") {
  const TsstInstance g = generate_tsst_instance(3, 7, 20.0, 15);
  const Matrix x = tsst_basic_features(g);
  CHECK(x.rows() == g.edges());
  CHECK(x.cols() == kTsstBasicFeatureCount);
  CHECK(x.col(0) == g.first_stage);
  CHECK(x.col(1) == g.second_stage.rowwise().minCoeff());
  CHECK(x.col(11) == g.second_stage.rowwise().maxCoeff());
  for (Index e = 0; e < g.edges(); ++e) {
    for (Index q = 1; q < 11; ++q) CHECK(x(e, q) <= x(e, q + 1));
  }
}

TEST_CASE("pipeline gap and samples") {
  std::vector<TsstInstance> inst;
  std::vector<LagrangianState> bounds;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    inst.push_back(generate_tsst_instance(3, 4, 20.0, 20 + seed));
    bounds.push_back(lagrangian_ascent(inst.back()));
  }
  std::mt19937_64 rng(16);
  for (std::size_t i = 0; i < inst.size(); ++i) {
    for (int t = 0; t < 5; ++t) {
      GlmModel m = GlmModel::zeros(kTsstBasicFeatureCount, true);
      m.weights = testing::random_vector(rng, kTsstBasicFeatureCount, -1, 1);
      m.bias = 1.0;
      const PipelineGap gap = tsst_pipeline_gap(m, inst[i], bounds[i]);
      CHECK(gap.cost >= tsst_brute_force(inst[i]).cost - 1e-9);
      CHECK(gap.gap_vs_lower >= -1e-9);
      CHECK(gap.gap_vs_lower == doctest::Approx((gap.cost - bounds[i].lower) / std::abs(bounds[i].lower) * 100.0));
    }
  }
  const auto samples = tsst_samples(inst, bounds);
  REQUIRE(samples.size() == 3);
  CHECK(*samples[0].target_solution == bounds[0].best_forest);
  CHECK(samples[0].cost(bounds[0].best_forest) == doctest::Approx(bounds[0].upper));
  // the target forest itself as scores decodes to the heuristic cost
  const Vector scores = 2.0 * bounds[0].best_forest - Vector::Ones(inst[0].edges());
  CHECK(samples[0].gap(scores) ==
        doctest::Approx((bounds[0].upper - bounds[0].lower) / std::abs(bounds[0].lower) * 100.0));
  bounds.pop_back();
  CHECK_THROWS_AS(tsst_samples(inst, bounds), DataError);
}
