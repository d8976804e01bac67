#pragma once

// Synthetic grid shortest paths: cells carry random features, their true
// costs are a hidden softplus-GLM of those features, and labels are the
// shortest corner-to-corner paths.

#include <cstdint>
#include <vector>

#include "colayers/core.hpp"
#include "colayers/learn.hpp"
#include "colayers/oracles.hpp"

namespace colayers::apps {

struct GridInstance {
  GridGraph grid;
  Matrix features;    // cells x p
  Objective theta_bar;  // negative cell costs, strictly < 0
  Vertex y_bar;       // optimal path for theta_bar
};

struct GridGeneratorConfig {
  int count = 10;
  Index k = 12;  // grid side
  Index features = 5;
  double noise = 0.0;
  std::uint64_t seed = 0;
  Connectivity connectivity = Connectivity::acyclic;
};

std::vector<GridInstance> generate_grid_instances(const GridGeneratorConfig& cfg);

// Path cost -theta_bar^T v.
double path_cost(const Objective& theta_bar, const Vertex& path);

// (c(pred) - c(opt)) / |c(opt)|. Throws DataError for infeasible paths.
double path_gap(const GridInstance& instance, const Vertex& predicted);

// Oracle used when training on grids. Additive perturbations need the
// any-sign Bellman oracle (acyclic grids); multiplicative ones use Dijkstra.
CoOracle grid_training_oracle(const GridGraph& grid, bool multiplicative);

// Training samples: target path and objective, cost -theta_bar^T y, and the
// path gap of the decoded prediction.
std::vector<Sample> grid_samples(const std::vector<GridInstance>& instances, bool multiplicative);

}  // namespace colayers::apps
