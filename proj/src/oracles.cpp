#include "colayers/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

namespace colayers {

// ---------------------------------------------------------------- simplex --

Vertex simplex_argmax(const Objective& theta) {
  if (theta.size() == 0) throw DimensionError("simplex_argmax: empty objective");
  Index best = 0;
  for (Index i = 1; i < theta.size(); ++i) {
    if (theta[i] > theta[best]) best = i;
  }
  return Vertex::Unit(theta.size(), best);
}

Moment softmax_reference(const Objective& theta) {
  require_finite(theta, "softmax_reference");
  const double shift = theta.maxCoeff();
  Moment out = (theta.array() - shift).exp().matrix();
  return out / out.sum();
}

CoOracle make_simplex_oracle(Index d) {
  if (d < 1) throw DimensionError("make_simplex_oracle: d must be >= 1");
  CoOracle oracle;
  oracle.name = "simplex";
  oracle.solve = [d](const Objective& theta) {
    require_same_size(theta.size(), d, "simplex oracle");
    return simplex_argmax(theta);
  };
  oracle.enumerate = [d] {
    std::vector<Vertex> out;
    for (Index i = 0; i < d; ++i) out.push_back(Vertex::Unit(d, i));
    return out;
  };
  return oracle;
}

// ------------------------------------------------------------------- grid --

const char* to_string(Connectivity c) {
  switch (c) {
    case Connectivity::four: return "four";
    case Connectivity::eight: return "eight";
    case Connectivity::acyclic: return "acyclic";
  }
  return "unknown";
}

Connectivity connectivity_from_string(const std::string& name) {
  if (name == "four" || name == "4") return Connectivity::four;
  if (name == "eight" || name == "8") return Connectivity::eight;
  if (name == "acyclic" || name == "dag") return Connectivity::acyclic;
  throw ConfigError("unknown grid connectivity '" + name + "'");
}

void GridGraph::validate() const {
  if (height < 1 || width < 1) throw DimensionError("GridGraph: height and width must be >= 1");
}

std::vector<Index> GridGraph::neighbors(Index c) const {
  const Index row = c / width;
  const Index col = c % width;
  std::vector<Index> out;
  auto push = [&](Index dr, Index dc) {
    const Index r = row + dr;
    const Index q = col + dc;
    if (r >= 0 && r < height && q >= 0 && q < width) out.push_back(cell(r, q));
  };
  switch (connectivity) {
    case Connectivity::four:
      push(-1, 0), push(0, -1), push(0, 1), push(1, 0);
      break;
    case Connectivity::eight:
      for (Index dr = -1; dr <= 1; ++dr)
        for (Index dc = -1; dc <= 1; ++dc)
          if (dr != 0 || dc != 0) push(dr, dc);
      break;
    case Connectivity::acyclic:
      push(0, 1), push(1, 0), push(1, 1);
      break;
  }
  return out;
}

namespace {

// Partial-path label: cost (or reward) plus the visited-cell indicator used
// for the lexicographic tie-break. Appending a cell that neither path holds
// preserves the order, which keeps Dijkstra and the DAG recursion exact.
struct PathLabel {
  double value = 0.0;
  std::vector<std::uint8_t> cells;
  Index node = 0;
};

bool indicator_less(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

Vertex to_vertex(const std::vector<std::uint8_t>& cells) {
  Vertex v(static_cast<Index>(cells.size()));
  for (std::size_t i = 0; i < cells.size(); ++i) v[static_cast<Index>(i)] = cells[i];
  return v;
}

}  // namespace

Vertex grid_dijkstra_argmax(const GridGraph& grid, const Objective& theta) {
  grid.validate();
  require_same_size(theta.size(), grid.cells(), "grid_dijkstra_argmax");
  require_finite(theta, "grid_dijkstra_argmax");
  require_sign(theta, SignDomain::strictly_negative, "grid_dijkstra_argmax");

  const Index n = grid.cells();
  const Index target = n - 1;
  // Labels compare by cost, then by indicator; smaller is better.
  auto worse = [](const PathLabel& a, const PathLabel& b) {
    if (a.value != b.value) return a.value > b.value;
    return indicator_less(b.cells, a.cells);
  };
  std::vector<std::unique_ptr<PathLabel>> best(static_cast<std::size_t>(n));
  std::vector<bool> settled(static_cast<std::size_t>(n), false);
  std::priority_queue<PathLabel, std::vector<PathLabel>, decltype(worse)> queue(worse);

  PathLabel start{-theta[0], std::vector<std::uint8_t>(static_cast<std::size_t>(n), 0), 0};
  start.cells[0] = 1;
  best[0] = std::make_unique<PathLabel>(start);
  queue.push(std::move(start));

  while (!queue.empty()) {
    PathLabel label = queue.top();
    queue.pop();
    const auto u = static_cast<std::size_t>(label.node);
    if (settled[u]) continue;
    settled[u] = true;
    if (label.node == target) return to_vertex(label.cells);
    for (Index w : grid.neighbors(label.node)) {
      const auto wi = static_cast<std::size_t>(w);
      if (settled[wi] || label.cells[wi]) continue;
      PathLabel next{label.value - theta[w], label.cells, w};
      next.cells[wi] = 1;
      if (!best[wi] || worse(*best[wi], next)) {
        best[wi] = std::make_unique<PathLabel>(next);
        queue.push(std::move(next));
      }
    }
  }
  throw DataError("grid_dijkstra_argmax: target unreachable");
}

Vertex grid_bellman_bounded_argmax(const GridGraph& grid, const Objective& theta) {
  grid.validate();
  if (grid.connectivity != Connectivity::acyclic) {
    throw ConfigError("grid_bellman_bounded_argmax requires acyclic connectivity");
  }
  require_same_size(theta.size(), grid.cells(), "grid_bellman_bounded_argmax");
  require_finite(theta, "grid_bellman_bounded_argmax");

  const Index n = grid.cells();
  // Row-major order is topological for right/down/diagonal moves, so a
  // single sweep equals Bellman-Ford capped at |nodes| rounds.
  std::vector<PathLabel> best(static_cast<std::size_t>(n));
  auto better = [](const PathLabel& a, const PathLabel& b) {
    if (a.value != b.value) return a.value > b.value;
    return indicator_less(a.cells, b.cells);
  };
  for (Index r = 0; r < grid.height; ++r) {
    for (Index c = 0; c < grid.width; ++c) {
      const Index id = grid.cell(r, c);
      PathLabel& slot = best[static_cast<std::size_t>(id)];
      if (id == 0) {
        slot = PathLabel{theta[0], std::vector<std::uint8_t>(static_cast<std::size_t>(n), 0), 0};
        slot.cells[0] = 1;
        continue;
      }
      const PathLabel* pick = nullptr;
      const std::pair<Index, Index> preds[] = {{r - 1, c}, {r, c - 1}, {r - 1, c - 1}};
      for (auto [pr, pc] : preds) {
        if (pr < 0 || pc < 0) continue;
        const PathLabel& cand = best[static_cast<std::size_t>(grid.cell(pr, pc))];
        if (pick == nullptr || better(cand, *pick)) pick = &cand;
      }
      slot = PathLabel{pick->value + theta[id], pick->cells, id};
      slot.cells[static_cast<std::size_t>(id)] = 1;
    }
  }
  return to_vertex(best.back().cells);
}

std::vector<Vertex> enumerate_grid_paths(const GridGraph& grid) {
  grid.validate();
  const Index n = grid.cells();
  std::set<std::vector<std::uint8_t>> seen;
  std::vector<std::uint8_t> on_path(static_cast<std::size_t>(n), 0);
  std::function<void(Index)> dfs = [&](Index u) {
    on_path[static_cast<std::size_t>(u)] = 1;
    if (u == n - 1) {
      seen.insert(on_path);
    } else {
      for (Index w : grid.neighbors(u)) {
        if (!on_path[static_cast<std::size_t>(w)]) dfs(w);
      }
    }
    on_path[static_cast<std::size_t>(u)] = 0;
  };
  dfs(0);
  std::vector<Vertex> out;
  out.reserve(seen.size());
  for (const auto& cells : seen) out.push_back(to_vertex(cells));
  return out;
}

bool is_valid_grid_path(const GridGraph& grid, const Vertex& v) {
  const Index n = grid.cells();
  if (v.size() != n) return false;
  Index count = 0;
  for (Index i = 0; i < n; ++i) {
    if (v[i] != 0.0 && v[i] != 1.0) return false;
    count += v[i] == 1.0 ? 1 : 0;
  }
  if (v[0] != 1.0 || v[n - 1] != 1.0) return false;
  // Search for a simple path through exactly the marked cells.
  std::vector<std::uint8_t> used(static_cast<std::size_t>(n), 0);
  std::function<bool(Index, Index)> walk = [&](Index u, Index depth) {
    if (u == n - 1) return depth == count;
    for (Index w : grid.neighbors(u)) {
      const auto wi = static_cast<std::size_t>(w);
      if (v[w] == 1.0 && !used[wi]) {
        used[wi] = 1;
        if (walk(w, depth + 1)) return true;
        used[wi] = 0;
      }
    }
    return false;
  };
  used[0] = 1;
  return walk(0, 1);
}

CoOracle make_grid_dijkstra_oracle(const GridGraph& grid) {
  grid.validate();
  CoOracle oracle;
  oracle.name = std::string("grid_dijkstra_") + to_string(grid.connectivity);
  oracle.sign_domain = SignDomain::strictly_negative;
  oracle.solve = [grid](const Objective& theta) { return grid_dijkstra_argmax(grid, theta); };
  if (grid.cells() <= 16) oracle.enumerate = [grid] { return enumerate_grid_paths(grid); };
  return oracle;
}

CoOracle make_grid_bellman_oracle(const GridGraph& grid) {
  grid.validate();
  if (grid.connectivity != Connectivity::acyclic) {
    throw ConfigError("make_grid_bellman_oracle requires acyclic connectivity");
  }
  CoOracle oracle;
  oracle.name = "grid_bellman";
  oracle.solve = [grid](const Objective& theta) {
    return grid_bellman_bounded_argmax(grid, theta);
  };
  if (grid.cells() <= 25) oracle.enumerate = [grid] { return enumerate_grid_paths(grid); };
  return oracle;
}

// ------------------------------------------------------------ permutahedron --

Vertex ranking_argmax(const Objective& theta) {
  if (theta.size() == 0) throw DimensionError("ranking_argmax: empty objective");
  std::vector<Index> order(static_cast<std::size_t>(theta.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return theta[a] < theta[b]; });
  Vertex ranks(theta.size());
  for (std::size_t k = 0; k < order.size(); ++k) ranks[order[k]] = static_cast<double>(k + 1);
  return ranks;
}

CoOracle make_ranking_oracle(Index d) {
  if (d < 1) throw DimensionError("make_ranking_oracle: d must be >= 1");
  CoOracle oracle;
  oracle.name = "ranking";
  oracle.solve = [d](const Objective& theta) {
    require_same_size(theta.size(), d, "ranking oracle");
    return ranking_argmax(theta);
  };
  if (d <= 7) {
    oracle.enumerate = [d] {
      std::vector<double> perm(static_cast<std::size_t>(d));
      std::iota(perm.begin(), perm.end(), 1.0);
      std::vector<Vertex> out;
      do {
        out.push_back(Eigen::Map<const Vector>(perm.data(), d));
      } while (std::next_permutation(perm.begin(), perm.end()));
      return out;
    };
  }
  return oracle;
}

// ------------------------------------------------------------------ graphs --

void WeightedGraph::validate() const {
  if (nodes < 1) throw DimensionError("WeightedGraph: needs at least one node");
  std::set<std::pair<Index, Index>> seen;
  for (const Edge& e : edges) {
    if (e.u < 0 || e.v >= nodes || e.u >= e.v) {
      std::ostringstream msg;
      msg << "WeightedGraph: invalid edge (" << e.u << ", " << e.v << ")";
      throw DataError(msg.str());
    }
    if (!seen.insert({e.u, e.v}).second) throw DataError("WeightedGraph: duplicate edge");
  }
}

bool WeightedGraph::connected() const {
  UnionFind uf(nodes);
  Index components = nodes;
  for (const Edge& e : edges) components -= uf.unite(e.u, e.v) ? 1 : 0;
  return components == 1;
}

WeightedGraph make_grid_graph(Index width) {
  if (width < 1) throw DimensionError("make_grid_graph: width must be >= 1");
  WeightedGraph g;
  g.nodes = width * width;
  for (Index r = 0; r < width; ++r) {
    for (Index c = 0; c < width; ++c) {
      const Index id = r * width + c;
      if (c + 1 < width) g.edges.push_back({id, id + 1});
      if (r + 1 < width) g.edges.push_back({id, id + width});
    }
  }
  return g;
}

UnionFind::UnionFind(Index n)
    : parent_(static_cast<std::size_t>(n)), rank_(static_cast<std::size_t>(n), 0) {
  std::iota(parent_.begin(), parent_.end(), Index{0});
}

Index UnionFind::find(Index x) {
  auto i = static_cast<std::size_t>(x);
  while (parent_[i] != static_cast<Index>(i)) {
    parent_[i] = parent_[static_cast<std::size_t>(parent_[i])];
    i = static_cast<std::size_t>(parent_[i]);
  }
  return static_cast<Index>(i);
}

bool UnionFind::unite(Index x, Index y) {
  Index rx = find(x);
  Index ry = find(y);
  if (rx == ry) return false;
  auto& rank_x = rank_[static_cast<std::size_t>(rx)];
  auto& rank_y = rank_[static_cast<std::size_t>(ry)];
  if (rank_x < rank_y) std::swap(rx, ry);
  parent_[static_cast<std::size_t>(ry)] = rx;
  if (rank_x == rank_y) ++rank_[static_cast<std::size_t>(rx)];
  return true;
}

namespace {

// Decreasing weight; equal weights take the higher edge index first, which
// makes the greedy result the lexicographically smallest optimal indicator.
std::vector<Index> greedy_order(const Objective& theta) {
  std::vector<Index> order(static_cast<std::size_t>(theta.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (theta[a] != theta[b]) return theta[a] > theta[b];
    return a > b;
  });
  return order;
}

}  // namespace

Vertex kruskal_max_weight_forest(const WeightedGraph& graph, const Objective& theta) {
  require_same_size(theta.size(), graph.edge_count(), "kruskal_max_weight_forest");
  Vertex chosen = Vertex::Zero(graph.edge_count());
  UnionFind uf(graph.nodes);
  for (Index e : greedy_order(theta)) {
    if (!(theta[e] > 0.0)) break;
    const Edge& edge = graph.edges[static_cast<std::size_t>(e)];
    if (uf.unite(edge.u, edge.v)) chosen[e] = 1.0;
  }
  return chosen;
}

Vertex kruskal_max_weight_spanning_tree(const WeightedGraph& graph, const Objective& theta) {
  require_same_size(theta.size(), graph.edge_count(), "kruskal_max_weight_spanning_tree");
  Vertex chosen = Vertex::Zero(graph.edge_count());
  UnionFind uf(graph.nodes);
  Index added = 0;
  for (Index e : greedy_order(theta)) {
    const Edge& edge = graph.edges[static_cast<std::size_t>(e)];
    if (uf.unite(edge.u, edge.v)) {
      chosen[e] = 1.0;
      ++added;
    }
  }
  if (added != graph.nodes - 1) throw DataError("kruskal_max_weight_spanning_tree: graph is disconnected");
  return chosen;
}

bool is_forest(const WeightedGraph& graph, const Vertex& edges) {
  if (edges.size() != graph.edge_count()) return false;
  UnionFind uf(graph.nodes);
  for (Index e = 0; e < edges.size(); ++e) {
    if (edges[e] == 0.0) continue;
    if (edges[e] != 1.0) return false;
    const Edge& edge = graph.edges[static_cast<std::size_t>(e)];
    if (!uf.unite(edge.u, edge.v)) return false;
  }
  return true;
}

bool is_spanning_tree(const WeightedGraph& graph, const Vertex& edges) {
  return is_forest(graph, edges) && static_cast<Index>(edges.sum()) == graph.nodes - 1;
}

namespace {

std::vector<Vertex> enumerate_edge_subsets(const WeightedGraph& graph, bool spanning_only) {
  const Index m = graph.edge_count();
  std::vector<Vertex> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    Vertex v(m);
    for (Index e = 0; e < m; ++e) v[e] = (mask >> e) & 1U ? 1.0 : 0.0;
    if (spanning_only ? is_spanning_tree(graph, v) : is_forest(graph, v)) out.push_back(std::move(v));
  }
  return out;
}

}  // namespace

CoOracle make_forest_oracle(const WeightedGraph& graph) {
  graph.validate();
  CoOracle oracle;
  oracle.name = "max_weight_forest";
  oracle.solve = [graph](const Objective& theta) { return kruskal_max_weight_forest(graph, theta); };
  if (graph.edge_count() <= 16) {
    oracle.enumerate = [graph] { return enumerate_edge_subsets(graph, false); };
  }
  return oracle;
}

CoOracle make_spanning_tree_oracle(const WeightedGraph& graph) {
  graph.validate();
  if (!graph.connected()) throw DataError("make_spanning_tree_oracle: graph is disconnected");
  CoOracle oracle;
  oracle.name = "max_weight_spanning_tree";
  oracle.solve = [graph](const Objective& theta) {
    return kruskal_max_weight_spanning_tree(graph, theta);
  };
  if (graph.edge_count() <= 16) {
    oracle.enumerate = [graph] { return enumerate_edge_subsets(graph, true); };
  }
  return oracle;
}

}  // namespace colayers
