#pragma once

// Two-stage stochastic minimum weight spanning tree on grid graphs.
//
// A first-stage forest y is bought at costs c; each scenario s then
// completes it into a spanning tree with edges z_s at costs d_s. The
// objective is sum c_e y_e + (1/|S|) sum_s sum_e d_es z_es.

#include <cstdint>
#include <limits>
#include <vector>

#include "colayers/core.hpp"
#include "colayers/learn.hpp"
#include "colayers/oracles.hpp"

namespace colayers::apps {

struct TsstInstance {
  Index width = 0;
  WeightedGraph graph;
  Vector first_stage;   // c, |E|
  Matrix second_stage;  // d, |E| x |S|

  Index edges() const { return graph.edge_count(); }
  Index scenarios() const { return second_stage.cols(); }
  void validate() const;
};

struct TsstSolution {
  Vertex y;  // |E|
  Matrix z;  // |E| x |S|
};

// Grid graph of the given width, c ~ U[0, 20], d ~ U[0, second_stage_cap].
TsstInstance generate_tsst_instance(Index width, Index scenarios, double second_stage_cap,
                                    std::uint64_t seed);

// Throws DataError naming the first violated constraint.
double tsst_solution_cost(const TsstInstance& instance, const TsstSolution& solution);

// Cheapest completion of forest y in every scenario (Kruskal with y merged).
TsstSolution second_stage_complete(const TsstInstance& instance, const Vertex& y);

struct DualEvaluation {
  double value = 0.0;    // G(theta)
  Matrix subgradient;    // |E| x |S|
  Vector y;              // first block minimizer, entries in {0, M}
  Matrix y_scenario;     // y_es in {0, 1}
};

// Lagrangian dual of the duplicated first-stage variables y_es = y_e:
//   G(theta) = sum_e min(0, M (c_e + mean_s theta_es))
//            + (1/|S|) sum_s MST_s(min(d_es, -theta_es)).
// A scenario picks y_es when -theta_es < d_es; ties go to z_es.
DualEvaluation lagrangian_dual(const TsstInstance& instance, const Matrix& theta, double box);

// Majority vote over scenarios (+1 when mean_s y_es > 0.5, else -1), then a
// max-weight forest.
Vertex lagrangian_heuristic(const WeightedGraph& graph, const Matrix& y_scenario);

struct LagrangianConfig {
  int max_iterations = 5000;
  double box = 1.0;         // M
  double step0 = 10.0;      // alpha_t = step0 / sqrt(t)
  int heuristic_every = 100;
  double gap_tolerance = 1e-3;

  void validate() const;
};

struct LagrangianState {
  Matrix theta;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  Vertex best_forest;  // heuristic forest attaining `upper`
  int iterations = 0;
  std::vector<double> lower_trace;  // best lower bound after each iteration

  // (upper - lower) / |upper|.
  double relative_gap() const;
};

LagrangianState lagrangian_ascent(const TsstInstance& instance, const LagrangianConfig& cfg = {});

constexpr Index kTsstBasicFeatureCount = 12;

// Quantile at level q of sorted values, interpolating linearly between
// order statistics at position q (n - 1).
double linear_quantile(const std::vector<double>& sorted, double q);

// Per edge: c_e, then quantiles of (d_es)_s at levels 0, 0.1, ..., 1.
Matrix tsst_basic_features(const TsstInstance& instance);

struct PipelineGap {
  double cost = 0.0;
  double gap_vs_lower = 0.0;      // percent
  double gap_vs_heuristic = 0.0;  // percent
};

// forest from theta -> completion -> cost.
double tsst_decode_cost(const TsstInstance& instance, const Objective& theta);

PipelineGap tsst_pipeline_gap(const GlmModel& model, const TsstInstance& instance,
                              const LagrangianState& bounds);

struct TsstOptimum {
  TsstSolution solution;
  double cost = 0.0;
};

// Exhaustive search over first-stage forests, at most 16 edges.
TsstOptimum tsst_brute_force(const TsstInstance& instance);

// Imitation samples: forest oracle, heuristic forest as target, decoded cost
// as experience cost and percent gap to the lower bound as model-selection
// gap.
std::vector<Sample> tsst_samples(const std::vector<TsstInstance>& instances,
                                 const std::vector<LagrangianState>& bounds);

}  // namespace colayers::apps
