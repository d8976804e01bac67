#include <doctest.h>

#include <cmath>
#include <random>

#include "colayers/oracles.hpp"
#include "test_support.hpp"

using namespace colayers;

namespace {
Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

WeightedGraph triangle() { return {3, {{0, 1}, {0, 2}, {1, 2}}}; }
}  // namespace

TEST_CASE("simplex argmax") {
  CHECK(simplex_argmax(vec({1, 3, 2})) == Vertex::Unit(3, 1));
  CHECK(simplex_argmax(vec({0, 0})) == Vertex::Unit(2, 0));
  CHECK(simplex_argmax(vec({-5, -1, -9})) == Vertex::Unit(3, 1));
}

TEST_CASE("simplex argmax is shift invariant") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    const Vector th = testing::random_vector(rng, 5, -2, 2);
    CHECK(simplex_argmax(th) == simplex_argmax((th.array() + 3.7).matrix()));
  }
}

TEST_CASE("softmax reference") {
  CHECK(softmax_reference(vec({0, 0})).isApprox(vec({0.5, 0.5})));
  CHECK(softmax_reference(vec({std::log(2.0), 0})).isApprox(vec({2.0 / 3.0, 1.0 / 3.0})));
  const Vector big = softmax_reference(vec({1000, 0}));
  CHECK(std::isfinite(big[1]));
  CHECK(big[0] == doctest::Approx(1.0));
  CHECK(big[1] < 1e-300);
}

TEST_CASE("grid dijkstra: single row") {
  GridGraph g{1, 5, Connectivity::eight};
  CHECK(grid_dijkstra_argmax(g, -Vector::LinSpaced(5, 1, 5)) == Vector::Ones(5));
}

TEST_CASE("grid dijkstra: 2x2 tie") {
  GridGraph g{2, 2, Connectivity::four};
  const Vertex v = grid_dijkstra_argmax(g, vec({-1, -10, -10, -1}));
  // both paths cost 12; [1,0,1,1] < [1,1,0,1]
  CHECK(v == vec({1, 0, 1, 1}));
}

TEST_CASE("grid oracles agree with path enumeration") {
  std::mt19937_64 rng(2);
  for (Connectivity c : {Connectivity::four, Connectivity::eight, Connectivity::acyclic}) {
    for (Index k = 2; k <= 4; ++k) {
      GridGraph g{k, k, c};
      const auto paths = testing::grid_path_vertices(g);
      CHECK(paths == enumerate_grid_paths(g));
      for (int t = 0; t < 20; ++t) {
        const Vector th = testing::random_vector(rng, g.cells(), -5, -0.1);
        const Vertex v = grid_dijkstra_argmax(g, th);
        CHECK(is_valid_grid_path(g, v));
        CHECK(th.dot(v) == doctest::Approx(testing::best_value(th, paths)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("bellman oracle on acyclic grids") {
  std::mt19937_64 rng(3);
  GridGraph g{3, 3, Connectivity::acyclic};
  const auto paths = testing::grid_path_vertices(g);
  for (int t = 0; t < 30; ++t) {
    const Vector pos = testing::random_vector(rng, 9, 0.1, 5);
    CHECK(pos.dot(grid_bellman_bounded_argmax(g, pos)) == doctest::Approx(testing::best_value(pos, paths)));
    const Vector mixed = testing::random_vector(rng, 9, -5, 5);
    CHECK(mixed.dot(grid_bellman_bounded_argmax(g, mixed)) ==
          doctest::Approx(testing::best_value(mixed, paths)));
    const Vector neg = testing::random_vector(rng, 9, -5, -0.1);
    CHECK(grid_bellman_bounded_argmax(g, neg) == grid_dijkstra_argmax(g, neg));
  }
  CHECK_THROWS_AS(grid_bellman_bounded_argmax(GridGraph{3, 3, Connectivity::four}, Vector::Ones(9)),
                  ConfigError);
}

TEST_CASE("dijkstra oracle enforces negative theta") {
  CoOracle o = make_grid_dijkstra_oracle(GridGraph{2, 2, Connectivity::eight});
  CHECK_THROWS_AS(o(vec({-1, 1, -1, -1})), SignDomainError);
}

TEST_CASE("is_valid_grid_path rejects broken paths") {
  GridGraph g{3, 3, Connectivity::four};
  CHECK_FALSE(is_valid_grid_path(g, vec({1, 0, 0, 0, 0, 0, 0, 0, 1})));
  CHECK_FALSE(is_valid_grid_path(g, vec({1, 1, 0, 0, 0, 0, 0, 1, 1})));
  CHECK(is_valid_grid_path(g, vec({1, 1, 1, 0, 0, 1, 0, 0, 1})));
}

TEST_CASE("ranking argmax") {
  CHECK(ranking_argmax(vec({0.1, 0.9, 0.5})) == vec({1, 3, 2}));
  CHECK(ranking_argmax(vec({2, 2, 2, 2})) == vec({1, 2, 3, 4}));
  std::mt19937_64 rng(4);
  for (Index d = 2; d <= 6; ++d) {
    const auto perms = testing::permutation_vertices(d);
    for (int t = 0; t < 20; ++t) {
      const Vector th = testing::random_vector(rng, d, -1, 1);
      CHECK(th.dot(ranking_argmax(th)) == doctest::Approx(testing::best_value(th, perms)));
    }
  }
}

TEST_CASE("max weight forest") {
  CHECK(kruskal_max_weight_forest(triangle(), vec({-1, -2, -3})) == Vector::Zero(3));
  CHECK(kruskal_max_weight_forest(triangle(), vec({3, 2, 1})) == vec({1, 1, 0}));
  WeightedGraph path{4, {{0, 1}, {1, 2}, {2, 3}}};
  CHECK(kruskal_max_weight_forest(path, vec({3, -1, 2})) == vec({1, 0, 1}));
}

TEST_CASE("max weight spanning tree") {
  WeightedGraph tree{4, {{0, 1}, {1, 2}, {1, 3}}};
  CHECK(kruskal_max_weight_spanning_tree(tree, vec({-5, -1, -3})) == Vector::Ones(3));
  CHECK(kruskal_max_weight_spanning_tree(triangle(), vec({3, 2, 1})) == vec({1, 1, 0}));
  WeightedGraph cycle{4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}};
  CHECK(kruskal_max_weight_spanning_tree(cycle, vec({5, 1, 4, 2})) == vec({1, 0, 1, 1}));
  WeightedGraph split{4, {{0, 1}, {2, 3}}};
  CHECK_THROWS_AS(kruskal_max_weight_spanning_tree(split, vec({1, 1})), DataError);
}

TEST_CASE("forest oracles agree with subset enumeration") {
  std::mt19937_64 rng(5);
  const WeightedGraph g = make_grid_graph(2);
  WeightedGraph k4{4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
  for (const WeightedGraph& graph : {g, k4, triangle()}) {
    const auto forests = testing::forest_vertices(graph);
    const auto trees = testing::forest_vertices(graph, true);
    for (int t = 0; t < 30; ++t) {
      const Vector th = testing::random_vector(rng, graph.edge_count(), -3, 3);
      const Vertex f = kruskal_max_weight_forest(graph, th);
      const Vertex s = kruskal_max_weight_spanning_tree(graph, th);
      CHECK(is_forest(graph, f));
      CHECK(is_spanning_tree(graph, s));
      CHECK(th.dot(f) == doctest::Approx(testing::best_value(th, forests)));
      CHECK(th.dot(s) == doctest::Approx(testing::best_value(th, trees)));
    }
  }
}

TEST_CASE("grid graph structure") {
  const WeightedGraph g = make_grid_graph(2);
  CHECK(g.nodes == 4);
  CHECK(g.edge_count() == 4);
  CHECK(make_grid_graph(3).edge_count() == 12);
  CHECK(g.connected());
}

TEST_CASE("union find") {
  UnionFind uf(4);
  CHECK(uf.unite(0, 1));
  CHECK(uf.unite(2, 3));
  CHECK_FALSE(uf.unite(1, 0));
  CHECK(uf.find(0) == uf.find(1));
  CHECK(uf.find(0) != uf.find(2));
}
