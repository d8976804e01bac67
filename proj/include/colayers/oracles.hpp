#pragma once

// Built-in linear maximization oracles.

#include <cstdint>
#include <vector>

#include "colayers/core.hpp"

namespace colayers {

// --- unit simplex ---------------------------------------------------------

// Basis vector e_i with i the smallest index attaining max theta.
Vertex simplex_argmax(const Objective& theta);

// Numerically stable softmax, the closed form of the entropy-regularized
// simplex layer.
Moment softmax_reference(const Objective& theta);

CoOracle make_simplex_oracle(Index d);

// --- grid shortest paths --------------------------------------------------

enum class Connectivity {
  four,   // up, down, left, right
  eight,  // king moves
  acyclic // right, down and down-right only
};

const char* to_string(Connectivity c);
Connectivity connectivity_from_string(const std::string& name);

// Cell grid; paths run from the top-left cell to the bottom-right one and a
// path is encoded as the row-major indicator of the cells it visits.
struct GridGraph {
  Index height = 0;
  Index width = 0;
  Connectivity connectivity = Connectivity::eight;

  Index cells() const { return height * width; }
  Index cell(Index row, Index col) const { return row * width + col; }
  std::vector<Index> neighbors(Index cell) const;
  void validate() const;
};

// Max theta-weight path for strictly negative theta, i.e. the min-cost path
// with positive cell costs -theta. Every visited cell is charged, start
// included. Ties go to the lexicographically smallest indicator.
Vertex grid_dijkstra_argmax(const GridGraph& grid, const Objective& theta);

// Max theta-weight path for any-sign theta by dynamic programming in
// topological order; requires acyclic connectivity.
Vertex grid_bellman_bounded_argmax(const GridGraph& grid, const Objective& theta);

// All simple corner-to-corner path indicators (deduplicated, sorted). Only
// for small grids.
std::vector<Vertex> enumerate_grid_paths(const GridGraph& grid);

// Degree/connectivity check that `v` is the indicator of a corner-to-corner
// path under the grid connectivity.
bool is_valid_grid_path(const GridGraph& grid, const Vertex& v);

CoOracle make_grid_dijkstra_oracle(const GridGraph& grid);
CoOracle make_grid_bellman_oracle(const GridGraph& grid);

// --- permutahedron --------------------------------------------------------

// v_i is the rank of theta_i among theta (1 = smallest, d = largest); equal
// entries are ranked by index.
Vertex ranking_argmax(const Objective& theta);

CoOracle make_ranking_oracle(Index d);

// --- forests and spanning trees -------------------------------------------

struct Edge {
  Index u = 0;
  Index v = 0;
};

// Simple undirected graph, edges stored with u < v. Vertices of the oracles
// below are edge indicators of length edges.size().
struct WeightedGraph {
  Index nodes = 0;
  std::vector<Edge> edges;

  Index edge_count() const { return static_cast<Index>(edges.size()); }
  void validate() const;
  bool connected() const;
};

// width x width grid graph with horizontal and vertical edges.
WeightedGraph make_grid_graph(Index width);

class UnionFind {
 public:
  explicit UnionFind(Index n);
  Index find(Index x);
  // Returns false when x and y were already joined.
  bool unite(Index x, Index y);

 private:
  std::vector<Index> parent_;
  std::vector<Index> rank_;
};

// Forest maximizing total weight; only edges with theta_e > 0 are eligible.
Vertex kruskal_max_weight_forest(const WeightedGraph& graph, const Objective& theta);

// Spanning tree maximizing total weight; throws DataError when the graph is
// disconnected.
Vertex kruskal_max_weight_spanning_tree(const WeightedGraph& graph, const Objective& theta);

// Union-find acyclicity check of an edge indicator.
bool is_forest(const WeightedGraph& graph, const Vertex& edges);
bool is_spanning_tree(const WeightedGraph& graph, const Vertex& edges);

CoOracle make_forest_oracle(const WeightedGraph& graph);
CoOracle make_spanning_tree_oracle(const WeightedGraph& graph);

}  // namespace colayers
