#include "colayers/apps/grid.hpp"

#include <cmath>

#include "colayers/rng.hpp"

namespace colayers::apps {

namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

std::vector<GridInstance> generate_grid_instances(const GridGeneratorConfig& cfg) {
  if (cfg.k < 2) throw ConfigError("grid generator: k must be >= 2");
  if (cfg.count < 0) throw ConfigError("grid generator: count must be >= 0");
  if (cfg.features < 1) throw ConfigError("grid generator: need at least one feature");
  if (!(cfg.noise >= 0.0)) throw ConfigError("grid generator: noise must be >= 0");

  GridGraph grid{cfg.k, cfg.k, cfg.connectivity};
  grid.validate();

  GaussianStream hidden = GaussianStream::for_sample(cfg.seed, 0);
  Vector w_true(cfg.features);
  for (Index j = 0; j < cfg.features; ++j) w_true[j] = hidden.next();

  std::vector<GridInstance> out;
  out.reserve(static_cast<std::size_t>(cfg.count));
  for (int i = 0; i < cfg.count; ++i) {
    GaussianStream g = GaussianStream::for_sample(cfg.seed, static_cast<std::uint64_t>(i) + 1);
    GridInstance inst;
    inst.grid = grid;
    inst.features.resize(grid.cells(), cfg.features);
    for (Index r = 0; r < grid.cells(); ++r) {
      for (Index c = 0; c < cfg.features; ++c) inst.features(r, c) = g.next();
    }
    const Vector score = inst.features * w_true;
    inst.theta_bar.resize(grid.cells());
    for (Index r = 0; r < grid.cells(); ++r) {
      const double eta = cfg.noise > 0.0 ? cfg.noise * g.next() : 0.0;
      // Floor keeps theta_bar strictly negative when softplus underflows.
      inst.theta_bar[r] = -std::max(softplus(score[r] + eta), 1e-12);
    }
    inst.y_bar = grid_dijkstra_argmax(grid, inst.theta_bar);
    out.push_back(std::move(inst));
  }
  return out;
}

double path_cost(const Objective& theta_bar, const Vertex& path) {
  require_same_size(theta_bar.size(), path.size(), "path_cost");
  return -theta_bar.dot(path);
}

double path_gap(const GridInstance& instance, const Vertex& predicted) {
  if (!is_valid_grid_path(instance.grid, predicted)) {
    throw DataError("path_gap: predicted vertex is not a feasible grid path");
  }
  const double best = path_cost(instance.theta_bar, instance.y_bar);
  return (path_cost(instance.theta_bar, predicted) - best) / std::abs(best);
}

CoOracle grid_training_oracle(const GridGraph& grid, bool multiplicative) {
  if (multiplicative) return make_grid_dijkstra_oracle(grid);
  if (grid.connectivity != Connectivity::acyclic) {
    throw ConfigError("additive grid losses need the acyclic connectivity (any-sign oracle)");
  }
  return make_grid_bellman_oracle(grid);
}

std::vector<Sample> grid_samples(const std::vector<GridInstance>& instances, bool multiplicative) {
  std::vector<Sample> out;
  out.reserve(instances.size());
  for (const GridInstance& inst : instances) {
    Sample s;
    s.features = inst.features;
    s.oracle = grid_training_oracle(inst.grid, multiplicative);
    s.target_solution = inst.y_bar;
    s.target_objective = inst.theta_bar;
    const Objective theta_bar = inst.theta_bar;
    s.cost = [theta_bar](const Vertex& v) { return path_cost(theta_bar, v); };
    const CoOracle decoder = s.oracle;
    s.gap = [inst, decoder](const Objective& theta) { return path_gap(inst, decoder(theta)); };
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace colayers::apps
