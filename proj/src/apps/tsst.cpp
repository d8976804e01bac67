#include "colayers/apps/tsst.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "colayers/rng.hpp"

namespace colayers::apps {

void TsstInstance::validate() const {
  graph.validate();
  if (!graph.connected()) throw DataError("tsst instance: graph is not connected");
  require_same_size(first_stage.size(), edges(), "tsst first-stage costs");
  require_same_size(second_stage.rows(), edges(), "tsst second-stage costs");
  if (scenarios() < 1) throw DataError("tsst instance: needs at least one scenario");
  if (!first_stage.allFinite() || !second_stage.allFinite()) {
    throw DataError("tsst instance: costs must be finite");
  }
}

TsstInstance generate_tsst_instance(Index width, Index scenarios, double second_stage_cap,
                                    std::uint64_t seed) {
  if (width < 2) throw ConfigError("tsst generator: width must be >= 2");
  if (scenarios < 1) throw ConfigError("tsst generator: scenarios must be >= 1");
  if (!(second_stage_cap >= 0.0)) throw ConfigError("tsst generator: cap must be >= 0");
  TsstInstance inst;
  inst.width = width;
  inst.graph = make_grid_graph(width);
  SplitMix64 rng(splitmix64_mix(seed ^ 0x75737374ULL));
  inst.first_stage.resize(inst.edges());
  for (Index e = 0; e < inst.edges(); ++e) inst.first_stage[e] = 20.0 * uniform01(rng);
  inst.second_stage.resize(inst.edges(), scenarios);
  for (Index s = 0; s < scenarios; ++s) {
    for (Index e = 0; e < inst.edges(); ++e) inst.second_stage(e, s) = second_stage_cap * uniform01(rng);
  }
  return inst;
}

double tsst_solution_cost(const TsstInstance& instance, const TsstSolution& solution) {
  require_same_size(solution.y.size(), instance.edges(), "tsst solution y");
  require_same_size(solution.z.rows(), instance.edges(), "tsst solution z");
  require_same_size(solution.z.cols(), instance.scenarios(), "tsst solution scenarios");
  if (!is_forest(instance.graph, solution.y)) throw DataError("tsst solution: y is not a forest");
  for (Index s = 0; s < instance.scenarios(); ++s) {
    const Vertex tree = solution.y + solution.z.col(s);
    if (tree.maxCoeff() > 1.0 || !is_spanning_tree(instance.graph, tree)) {
      std::ostringstream msg;
      msg << "tsst solution: y + z_" << s << " is not a spanning tree";
      throw DataError(msg.str());
    }
  }
  const double second = (instance.second_stage.cwiseProduct(solution.z)).sum();
  return instance.first_stage.dot(solution.y) + second / static_cast<double>(instance.scenarios());
}

TsstSolution second_stage_complete(const TsstInstance& instance, const Vertex& y) {
  require_same_size(y.size(), instance.edges(), "second_stage_complete");
  if (!is_forest(instance.graph, y)) throw DataError("second_stage_complete: y is not a forest");
  const auto& edges = instance.graph.edges;
  TsstSolution out{y, Matrix::Zero(instance.edges(), instance.scenarios())};
  std::vector<Index> order(edges.size());
  for (Index s = 0; s < instance.scenarios(); ++s) {
    UnionFind uf(instance.graph.nodes);
    for (Index e = 0; e < instance.edges(); ++e) {
      if (y[e] > 0.5) uf.unite(edges[static_cast<std::size_t>(e)].u, edges[static_cast<std::size_t>(e)].v);
    }
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
      return instance.second_stage(a, s) < instance.second_stage(b, s);
    });
    for (Index e : order) {
      const Edge& edge = edges[static_cast<std::size_t>(e)];
      if (uf.unite(edge.u, edge.v)) out.z(e, s) = 1.0;
    }
  }
  return out;
}

DualEvaluation lagrangian_dual(const TsstInstance& instance, const Matrix& theta, double box) {
  if (!(box > 0.0)) throw ConfigError("lagrangian_dual: box bound M must be > 0");
  require_same_size(theta.rows(), instance.edges(), "lagrangian_dual theta rows");
  require_same_size(theta.cols(), instance.scenarios(), "lagrangian_dual theta cols");
  const Index n_edges = instance.edges();
  const Index n_scen = instance.scenarios();
  const double inv_s = 1.0 / static_cast<double>(n_scen);

  DualEvaluation out;
  out.y = Vector::Zero(n_edges);
  out.y_scenario = Matrix::Zero(n_edges, n_scen);
  double first = 0.0;
  for (Index e = 0; e < n_edges; ++e) {
    const double reduced = instance.first_stage[e] + theta.row(e).mean();
    if (reduced < 0.0) {
      out.y[e] = box;
      first += box * reduced;
    }
  }

  std::vector<double> scenario_values(static_cast<std::size_t>(n_scen), 0.0);
#pragma omp parallel for schedule(static)
  for (Index s = 0; s < n_scen; ++s) {
    Vector weight(n_edges);
    for (Index e = 0; e < n_edges; ++e) weight[e] = -std::min(instance.second_stage(e, s), -theta(e, s));
    const Vertex tree = kruskal_max_weight_spanning_tree(instance.graph, weight);
    double value = 0.0;
    for (Index e = 0; e < n_edges; ++e) {
      if (tree[e] < 0.5) continue;
      const bool first_stage_copy = -theta(e, s) < instance.second_stage(e, s);
      if (first_stage_copy) out.y_scenario(e, s) = 1.0;
      value -= weight[e];
    }
    scenario_values[static_cast<std::size_t>(s)] = value;
  }
  double second = 0.0;
  for (double v : scenario_values) second += v;

  out.value = first + inv_s * second;
  out.subgradient = inv_s * (out.y.replicate(1, n_scen) - out.y_scenario);
  return out;
}

Vertex lagrangian_heuristic(const WeightedGraph& graph, const Matrix& y_scenario) {
  require_same_size(y_scenario.rows(), graph.edge_count(), "lagrangian_heuristic");
  if (y_scenario.cols() < 1) throw DataError("lagrangian_heuristic: no scenarios");
  Vector w(graph.edge_count());
  for (Index e = 0; e < graph.edge_count(); ++e) w[e] = y_scenario.row(e).mean() > 0.5 ? 1.0 : -1.0;
  return kruskal_max_weight_forest(graph, w);
}

void LagrangianConfig::validate() const {
  if (max_iterations < 1) throw ConfigError("LagrangianConfig: max_iterations must be >= 1");
  if (!(box > 0.0)) throw ConfigError("LagrangianConfig: box must be > 0");
  if (!(step0 > 0.0)) throw ConfigError("LagrangianConfig: step0 must be > 0");
  if (heuristic_every < 1) throw ConfigError("LagrangianConfig: heuristic_every must be >= 1");
  if (!(gap_tolerance >= 0.0)) throw ConfigError("LagrangianConfig: gap_tolerance must be >= 0");
}

double LagrangianState::relative_gap() const { return (upper - lower) / std::abs(upper); }

LagrangianState lagrangian_ascent(const TsstInstance& instance, const LagrangianConfig& cfg) {
  cfg.validate();
  instance.validate();
  LagrangianState state;
  state.theta = Matrix::Zero(instance.edges(), instance.scenarios());
  auto try_heuristic = [&](const Matrix& y_scenario) {
    const Vertex forest = lagrangian_heuristic(instance.graph, y_scenario);
    const double cost = tsst_solution_cost(instance, second_stage_complete(instance, forest));
    if (cost < state.upper) {
      state.upper = cost;
      state.best_forest = forest;
    }
  };

  for (int t = 1; t <= cfg.max_iterations; ++t) {
    const DualEvaluation eval = lagrangian_dual(instance, state.theta, cfg.box);
    state.lower = std::max(state.lower, eval.value);
    state.lower_trace.push_back(state.lower);
    state.iterations = t;
    if (t == 1 || t % cfg.heuristic_every == 0) try_heuristic(eval.y_scenario);
    if (state.relative_gap() <= cfg.gap_tolerance) break;
    state.theta += (cfg.step0 / std::sqrt(static_cast<double>(t))) * eval.subgradient;
  }
  // One last heuristic from the final multipliers.
  try_heuristic(lagrangian_dual(instance, state.theta, cfg.box).y_scenario);
  return state;
}

double linear_quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw DataError("linear_quantile: empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Matrix tsst_basic_features(const TsstInstance& instance) {
  if (instance.scenarios() < 1) throw DataError("tsst_basic_features: no scenarios");
  Matrix x(instance.edges(), kTsstBasicFeatureCount);
  std::vector<double> row(static_cast<std::size_t>(instance.scenarios()));
  for (Index e = 0; e < instance.edges(); ++e) {
    x(e, 0) = instance.first_stage[e];
    for (Index s = 0; s < instance.scenarios(); ++s) row[static_cast<std::size_t>(s)] = instance.second_stage(e, s);
    std::sort(row.begin(), row.end());
    for (Index q = 0; q <= 10; ++q) x(e, q + 1) = linear_quantile(row, static_cast<double>(q) / 10.0);
  }
  return x;
}

double tsst_decode_cost(const TsstInstance& instance, const Objective& theta) {
  const Vertex forest = kruskal_max_weight_forest(instance.graph, theta);
  return tsst_solution_cost(instance, second_stage_complete(instance, forest));
}

PipelineGap tsst_pipeline_gap(const GlmModel& model, const TsstInstance& instance,
                              const LagrangianState& bounds) {
  PipelineGap out;
  out.cost = tsst_decode_cost(instance, glm_forward(model, tsst_basic_features(instance)));
  out.gap_vs_lower = (out.cost - bounds.lower) / std::abs(bounds.lower) * 100.0;
  out.gap_vs_heuristic = (out.cost - bounds.upper) / std::abs(bounds.upper) * 100.0;
  return out;
}

TsstOptimum tsst_brute_force(const TsstInstance& instance) {
  instance.validate();
  const Index m = instance.edges();
  if (m > 16) throw ConfigError("tsst_brute_force refuses more than 16 edges");
  TsstOptimum best;
  best.cost = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    Vertex y = Vertex::Zero(m);
    for (Index e = 0; e < m; ++e) y[e] = (mask >> e) & 1u ? 1.0 : 0.0;
    if (!is_forest(instance.graph, y)) continue;
    TsstSolution sol = second_stage_complete(instance, y);
    const double cost = tsst_solution_cost(instance, sol);
    if (cost < best.cost) {
      best.cost = cost;
      best.solution = std::move(sol);
    }
  }
  return best;
}

std::vector<Sample> tsst_samples(const std::vector<TsstInstance>& instances,
                                 const std::vector<LagrangianState>& bounds) {
  if (instances.size() != bounds.size()) throw DataError("tsst_samples: one bound per instance needed");
  std::vector<Sample> out;
  out.reserve(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const TsstInstance& inst = instances[i];
    const double lower = bounds[i].lower;
    Sample s;
    s.features = tsst_basic_features(inst);
    s.oracle = make_forest_oracle(inst.graph);
    s.target_solution = bounds[i].best_forest;
    s.cost = [inst](const Vertex& forest) {
      return tsst_solution_cost(inst, second_stage_complete(inst, forest));
    };
    s.gap = [inst, lower](const Objective& theta) {
      return (tsst_decode_cost(inst, theta) - lower) / std::abs(lower) * 100.0;
    };
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace colayers::apps
