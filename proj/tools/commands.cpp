#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <numeric>

#include "colayers/apps/grid.hpp"
#include "colayers/apps/scheduling.hpp"
#include "colayers/apps/tsst.hpp"
#include "colayers/rng.hpp"

namespace colayers::cli {

namespace fs = std::filesystem;
using io::Json;

namespace {

// "dir/name.json" + ".bounds.json" -> "dir/name.bounds.json"
std::string sibling(const std::string& path, const std::string& suffix) {
  fs::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

void require_out(const Options& o) {
  if (o.out.empty()) throw ConfigError(o.command + ": --out is required");
}

void require_positive(long value, const char* what) {
  if (value < 1) throw ConfigError(std::string(what) + " must be >= 1");
}

std::uint64_t instance_seed(std::uint64_t seed, std::size_t i) {
  return splitmix64_mix(seed + 0x9e3779b97f4a7c15ULL * (i + 1));
}

std::vector<apps::LagrangianState> compute_bounds(const std::vector<apps::TsstInstance>& instances,
                                                  int iterations) {
  apps::LagrangianConfig cfg;
  cfg.max_iterations = iterations;
  std::vector<apps::LagrangianState> out(instances.size());
  const auto n = static_cast<std::ptrdiff_t>(instances.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = apps::lagrangian_ascent(instances[static_cast<std::size_t>(i)], cfg);
    } catch (...) {
#pragma omp critical(colayers_cli_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

// Bounds for every instance, from the cache file when present and computed
// otherwise.
std::vector<apps::LagrangianState> tsst_bounds(const io::Dataset& data,
                                               const std::vector<apps::TsstInstance>& instances,
                                               const std::string& cache_path, int iterations) {
  io::BoundsCache cache;
  if (!cache_path.empty() && fs::exists(cache_path)) cache = io::bounds_from_json(io::read_json(cache_path));
  std::vector<apps::LagrangianState> out(instances.size());
  std::vector<apps::TsstInstance> missing;
  std::vector<std::size_t> missing_index;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto it = cache.find(io::instance_hash(data.instances[i]));
    if (it != cache.end()) {
      out[i] = io::to_state(it->second);
    } else {
      missing.push_back(instances[i]);
      missing_index.push_back(i);
    }
  }
  const auto computed = compute_bounds(missing, iterations);
  for (std::size_t m = 0; m < computed.size(); ++m) out[missing_index[m]] = computed[m];
  return out;
}

std::string resolve_app(const Options& o, const std::string& data_app) {
  if (!o.app.empty() && o.app != data_app) {
    throw ConfigError("--app " + o.app + " does not match the dataset app '" + data_app + "'");
  }
  return data_app;
}

struct AppDefaults {
  std::string loss;
  double epsilon;
  int nb_samples;
  int epochs;
  double lr;
  bool bias;
  OutputActivation activation;
};

AppDefaults defaults_for(const std::string& app) {
  if (app == "grid") return {"fy_add", 0.1, 20, 10, 0.01, false, OutputActivation::negative_softplus};
  if (app == "scheduling") return {"fy_add", 0.1, 100, 30, 0.05, false, OutputActivation::identity};
  if (app == "tsst") return {"fy_add", 1.0, 20, 20, 0.01, true, OutputActivation::identity};
  throw ConfigError("unknown app '" + app + "' (expected grid, scheduling or tsst)");
}

TrainConfig train_config(const Options& o, const std::string& app) {
  const AppDefaults d = defaults_for(app);
  TrainConfig cfg;
  cfg.loss = loss_from_string(o.loss.empty() ? d.loss : o.loss);
  cfg.epsilon = o.epsilon.value_or(d.epsilon);
  cfg.nb_samples = o.nb_samples.value_or(d.nb_samples);
  cfg.epochs = o.epochs.value_or(d.epochs);
  cfg.batch_size = o.batch_size.value_or(1);
  cfg.adam.learning_rate = o.lr.value_or(d.lr);
  cfg.seed = o.seed;
  cfg.use_bias = o.bias.value_or(d.bias);
  if (o.activation) {
    cfg.activation = activation_from_string(*o.activation);
  } else {
    cfg.activation = is_multiplicative_loss(cfg.loss) ? OutputActivation::negative_softplus : d.activation;
  }
  cfg.validate();
  return cfg;
}

Json train_config_json(const TrainConfig& c) {
  Json j;
  j["loss"] = to_string(c.loss);
  j["epsilon"] = c.epsilon;
  j["nb_samples"] = c.nb_samples;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["learning_rate"] = c.adam.learning_rate;
  j["adam_beta1"] = c.adam.beta1;
  j["adam_beta2"] = c.adam.beta2;
  j["adam_epsilon"] = c.adam.epsilon;
  j["use_bias"] = c.use_bias;
  j["activation"] = to_string(c.activation);
  j["seed"] = c.seed;
  return j;
}

// Samples with raw features, for any app.
struct AppData {
  std::string app;
  std::vector<Sample> samples;
  std::vector<apps::GridInstance> grid;
  std::vector<apps::SchedulingInstance> scheduling;
  std::vector<apps::TsstInstance> tsst;
  std::vector<apps::LagrangianState> bounds;
};

AppData load_app_data(const Options& o, const io::Dataset& data, const std::string& app, LossKind loss) {
  AppData out;
  out.app = resolve_app(o, data.app);
  if (app != data.app) throw ConfigError("model trained for '" + app + "' cannot run on '" + data.app + "' data");
  if (data.instances.empty()) throw DataError("dataset '" + o.data + "' has no instances");
  if (out.app == "grid") {
    out.grid = io::grid_instances(data);
    out.samples = apps::grid_samples(out.grid, is_multiplicative_loss(loss));
  } else if (out.app == "scheduling") {
    out.scheduling = io::scheduling_instances(data);
    out.samples = apps::scheduling_samples(out.scheduling);
  } else if (out.app == "tsst") {
    out.tsst = io::tsst_instances(data);
    const std::string cache = o.bounds.empty() ? sibling(o.data, ".bounds.json") : o.bounds;
    out.bounds = tsst_bounds(data, out.tsst, cache, o.lagrangian_iterations);
    out.samples = apps::tsst_samples(out.tsst, out.bounds);
  } else {
    throw DataError("unknown app '" + data.app + "' in dataset");
  }
  return out;
}

io::Dataset load_dataset(const Options& o) {
  if (o.data.empty()) throw ConfigError(o.command + ": --data is required");
  return io::dataset_from_json(io::read_json(o.data));
}

std::vector<Sample> normalized(std::vector<Sample> samples, const FeatureScaler& scaler) {
  for (Sample& s : samples) s.features = scaler.normalize(s.features);
  return samples;
}

}  // namespace

Outputs cmd_generate(const Options& o) {
  require_out(o);
  require_positive(o.count, "--count");
  if (o.app.empty()) throw ConfigError("generate: --app is required");
  io::Dataset data;
  data.app = o.app;
  Outputs out;
  Json params;
  params["count"] = o.count;
  params["seed"] = o.seed;

  if (o.app == "grid") {
    apps::GridGeneratorConfig cfg;
    cfg.count = o.count;
    cfg.k = o.k;
    cfg.features = o.features;
    cfg.noise = o.noise;
    cfg.seed = o.seed;
    cfg.connectivity = connectivity_from_string(o.connectivity);
    params["k"] = o.k;
    params["features"] = o.features;
    params["noise"] = o.noise;
    params["connectivity"] = o.connectivity;
    for (const auto& inst : apps::generate_grid_instances(cfg)) data.instances.push_back(io::to_json(inst));
  } else if (o.app == "scheduling") {
    apps::SchedulingGeneratorConfig cfg;
    cfg.count = o.count;
    cfg.min_jobs = o.min_jobs;
    cfg.max_jobs = o.max_jobs;
    cfg.seed = o.seed;
    params["min_jobs"] = o.min_jobs;
    params["max_jobs"] = o.max_jobs;
    for (const auto& inst : apps::generate_scheduling_instances(cfg)) data.instances.push_back(io::to_json(inst));
  } else if (o.app == "tsst") {
    std::vector<apps::TsstInstance> instances;
    for (int i = 0; i < o.count; ++i) {
      instances.push_back(apps::generate_tsst_instance(o.width, o.scenarios, o.cap,
                                                       instance_seed(o.seed, static_cast<std::size_t>(i))));
      data.instances.push_back(io::to_json(instances.back()));
    }
    params["width"] = o.width;
    params["scenarios"] = o.scenarios;
    params["cap"] = o.cap;
    if (o.label) {
      params["lagrangian_iterations"] = o.lagrangian_iterations;
      const auto states = compute_bounds(instances, o.lagrangian_iterations);
      io::BoundsCache cache;
      for (std::size_t i = 0; i < states.size(); ++i) {
        cache[io::instance_hash(data.instances[i])] = io::to_record(states[i]);
      }
      const std::string bounds_path = o.bounds.empty() ? sibling(o.out, ".bounds.json") : o.bounds;
      io::write_json(bounds_path, io::to_json(cache));
      out.files.push_back(bounds_path);
    }
  } else {
    throw ConfigError("unknown app '" + o.app + "' (expected grid, scheduling or tsst)");
  }
  data.params = params;
  io::write_json(o.out, io::to_json(data));
  out.files.insert(out.files.begin(), o.out);
  out.config = params;
  std::cout << "wrote " << o.count << " " << o.app << " instances to " << o.out << "\n";
  return out;
}

Outputs cmd_train(const Options& o) {
  require_out(o);
  if (!(o.val_fraction >= 0.0 && o.val_fraction < 1.0)) throw ConfigError("--val-fraction must be in [0, 1)");
  const io::Dataset dataset = load_dataset(o);
  const std::string app = resolve_app(o, dataset.app);
  const TrainConfig cfg = train_config(o, app);
  AppData data = load_app_data(o, dataset, app, cfg.loss);

  const std::size_t n = data.samples.size();
  std::size_t n_val = static_cast<std::size_t>(std::lround(o.val_fraction * static_cast<double>(n)));
  if (o.val_fraction > 0.0 && n >= 2) n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
  if (n_val >= n) n_val = 0;
  std::vector<Sample> train_set(data.samples.begin(), data.samples.end() - static_cast<std::ptrdiff_t>(n_val));
  std::vector<Sample> val_set(data.samples.end() - static_cast<std::ptrdiff_t>(n_val), data.samples.end());

  std::vector<Matrix> train_features;
  for (const Sample& s : train_set) train_features.push_back(s.features);
  const FeatureScaler scaler = FeatureScaler::fit(train_features);
  const TrainResult result = train(normalized(train_set, scaler), normalized(val_set, scaler), cfg);

  io::Checkpoint ckpt;
  ckpt.app = app;
  ckpt.loss = to_string(cfg.loss);
  ckpt.epsilon = cfg.epsilon;
  ckpt.nb_samples = cfg.nb_samples;
  ckpt.seed = cfg.seed;
  ckpt.best_epoch = result.best_epoch;
  ckpt.model = result.model;
  ckpt.feature_scales = scaler.scales;
  io::write_json(o.out, io::to_json(ckpt));
  const std::string history = o.history.empty() ? sibling(o.out, ".history.csv") : o.history;
  io::write_text(history, io::history_csv(result.history));

  Outputs out;
  out.files = {o.out, history};
  out.config = train_config_json(cfg);
  out.config["app"] = app;
  out.config["train_instances"] = train_set.size();
  out.config["validation_instances"] = val_set.size();

  const EpochRecord& first = result.history.front();
  const EpochRecord& best = result.history[static_cast<std::size_t>(result.best_epoch)];
  std::cout << "trained " << app << " with " << to_string(cfg.loss) << " for " << cfg.epochs
            << " epochs; best epoch " << result.best_epoch << "\n"
            << "  val_loss " << first.val_loss << " -> " << best.val_loss << ", val_gap "
            << first.val_gap << " -> " << best.val_gap << "\n";
  if (result.unconverged_steps > 0) {
    std::cerr << "warning: " << result.unconverged_steps
              << " training steps used an unconverged Frank-Wolfe layer\n";
    out.exit_code = 4;
  }
  return out;
}

Outputs cmd_eval(const Options& o) {
  require_out(o);
  if (o.model.empty()) throw ConfigError("eval: --model is required");
  const io::Checkpoint ckpt = io::checkpoint_from_json(io::read_json(o.model));
  const LossKind loss = loss_from_string(ckpt.loss);
  AppData data = load_app_data(o, load_dataset(o), ckpt.app, loss);
  const FeatureScaler scaler{ckpt.feature_scales};

  const std::size_t n = data.samples.size();
  std::vector<double> gap(n, 0.0);
  std::vector<double> gap_heuristic(n, std::numeric_limits<double>::quiet_NaN());
  std::vector<double> runtime_ms(n, 0.0);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    try {
      const auto start = std::chrono::steady_clock::now();
      if (data.app == "grid") {
        const apps::GridInstance& inst = data.grid[i];
        const Objective theta = glm_forward(ckpt.model, scaler.normalize(inst.features));
        const CoOracle oracle = apps::grid_training_oracle(inst.grid, is_multiplicative_loss(loss));
        gap[i] = 100.0 * apps::path_gap(inst, oracle(theta));
      } else if (data.app == "scheduling") {
        const apps::SchedulingInstance& inst = data.scheduling[i];
        if (!inst.optimal) throw DataError("eval: scheduling instance without brute-force label");
        const Objective theta = glm_forward(ckpt.model, scaler.normalize(apps::scheduling_features(inst)));
        gap[i] = apps::scheduling_gap(apps::schedule_from_scores(theta), inst, inst.optimal_total);
      } else {
        const apps::TsstInstance& inst = data.tsst[i];
        const Objective theta = glm_forward(ckpt.model, scaler.normalize(apps::tsst_basic_features(inst)));
        const double cost = apps::tsst_decode_cost(inst, theta);
        gap[i] = (cost - data.bounds[i].lower) / std::abs(data.bounds[i].lower) * 100.0;
        gap_heuristic[i] = (cost - data.bounds[i].upper) / std::abs(data.bounds[i].upper) * 100.0;
      }
      runtime_ms[i] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    } catch (...) {
#pragma omp critical(colayers_cli_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  const bool tsst = data.app == "tsst";
  std::string metrics = tsst ? "instance_id,gap_percent,gap_vs_heuristic_percent\n" : "instance_id,gap_percent\n";
  std::string timings = "instance_id,runtime_ms\n";
  for (std::size_t i = 0; i < n; ++i) {
    metrics += std::to_string(i) + "," + io::format_double(gap[i]);
    if (tsst) metrics += "," + io::format_double(gap_heuristic[i]);
    metrics += "\n";
    timings += std::to_string(i) + "," + io::format_double(runtime_ms[i]) + "\n";
  }
  const std::string timings_path = sibling(o.out, ".timings.csv");
  io::write_text(o.out, metrics);
  io::write_text(timings_path, timings);

  const double mean = std::accumulate(gap.begin(), gap.end(), 0.0) / static_cast<double>(n);
  const auto [lo, hi] = std::minmax_element(gap.begin(), gap.end());
  std::printf("%s: %zu instances, gap %% mean %.4f min %.4f max %.4f\n", data.app.c_str(), n, mean, *lo, *hi);
  if (tsst) {
    const double mean_h = std::accumulate(gap_heuristic.begin(), gap_heuristic.end(), 0.0) / static_cast<double>(n);
    const auto [hlo, hhi] = std::minmax_element(gap_heuristic.begin(), gap_heuristic.end());
    std::printf("  vs heuristic: mean %.4f min %.4f max %.4f\n", mean_h, *hlo, *hhi);
  }
  std::printf("  runtime ms mean %.4f\n",
              std::accumulate(runtime_ms.begin(), runtime_ms.end(), 0.0) / static_cast<double>(n));

  Outputs out;
  out.files = {o.out};
  out.volatile_files = {timings_path};
  out.config["app"] = data.app;
  out.config["model"] = o.model;
  out.config["data"] = o.data;
  return out;
}

namespace {

template <class F>
double mean_ms(int reps, F&& f) {
  const auto start = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) f();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count() / reps;
}

struct StageTimes {
  std::string suite;
  Index size;
  double features, encoder, oracle, decode;
};

Vector bench_weights(Index p, std::uint64_t seed) {
  GaussianStream g = GaussianStream::for_sample(seed, 0);
  Vector w(p);
  for (Index j = 0; j < p; ++j) w[j] = g.next();
  return w;
}

}  // namespace

Outputs cmd_bench(const Options& o) {
  require_out(o);
  require_positive(o.reps, "--reps");
  const std::vector<std::string> known = {"grid", "scheduling", "tsst"};
  if (o.suite != "all" && std::find(known.begin(), known.end(), o.suite) == known.end()) {
    throw ConfigError("unknown bench suite '" + o.suite + "' (expected grid, scheduling, tsst or all)");
  }
  auto wanted = [&](const char* s) { return o.suite == "all" || o.suite == s; };
  std::vector<StageTimes> rows;
  volatile double sink = 0.0;

  if (wanted("grid")) {
    for (Index k : {8, 16, 24, 32}) {
      apps::GridGeneratorConfig cfg;
      cfg.count = 1;
      cfg.k = k;
      cfg.seed = o.seed;
      cfg.connectivity = Connectivity::eight;
      const apps::GridInstance inst = apps::generate_grid_instances(cfg).front();
      GlmModel model = GlmModel::zeros(cfg.features, false, OutputActivation::negative_softplus);
      model.weights = bench_weights(cfg.features, o.seed);
      const FeatureScaler scaler = FeatureScaler::fit({inst.features});
      Matrix x;
      Objective theta;
      Vertex path;
      StageTimes t{"grid", k * k, 0, 0, 0, 0};
      t.features = mean_ms(o.reps, [&] { x = scaler.normalize(inst.features); });
      t.encoder = mean_ms(o.reps, [&] { theta = glm_forward(model, x); });
      t.oracle = mean_ms(o.reps, [&] { path = grid_dijkstra_argmax(inst.grid, theta); });
      t.decode = mean_ms(o.reps, [&] { sink = sink + apps::path_cost(inst.theta_bar, path); });
      rows.push_back(t);
    }
  }
  if (wanted("scheduling")) {
    for (Index n : {10, 50, 100, 200}) {
      apps::SchedulingGeneratorConfig cfg;
      cfg.count = 1;
      cfg.min_jobs = cfg.max_jobs = n;
      cfg.seed = o.seed;
      cfg.label = false;
      const apps::SchedulingInstance inst = apps::generate_scheduling_instances(cfg).front();
      GlmModel model = GlmModel::zeros(apps::kSchedulingFeatureCount);
      model.weights = bench_weights(apps::kSchedulingFeatureCount, o.seed);
      Matrix x;
      Objective theta;
      Vertex ranking;
      StageTimes t{"scheduling", n, 0, 0, 0, 0};
      t.features = mean_ms(o.reps, [&] { x = apps::scheduling_features(inst); });
      t.encoder = mean_ms(o.reps, [&] { theta = glm_forward(model, x); });
      t.oracle = mean_ms(o.reps, [&] { ranking = ranking_argmax(theta); });
      t.decode = mean_ms(o.reps, [&] {
        sink = sink + apps::completion_times(apps::schedule_from_scores(theta), inst.release, inst.processing).total;
      });
      rows.push_back(t);
    }
  }
  if (wanted("tsst")) {
    for (Index w : {5, 10, 20, 30}) {
      const apps::TsstInstance inst = apps::generate_tsst_instance(w, 10, 20.0, o.seed);
      GlmModel model = GlmModel::zeros(apps::kTsstBasicFeatureCount, true);
      model.weights = bench_weights(apps::kTsstBasicFeatureCount, o.seed);
      Matrix x;
      Objective theta;
      Vertex forest;
      StageTimes t{"tsst", inst.edges(), 0, 0, 0, 0};
      t.features = mean_ms(o.reps, [&] { x = apps::tsst_basic_features(inst); });
      t.encoder = mean_ms(o.reps, [&] { theta = glm_forward(model, x); });
      t.oracle = mean_ms(o.reps, [&] { forest = kruskal_max_weight_forest(inst.graph, theta); });
      t.decode = mean_ms(o.reps, [&] {
        sink = sink + apps::tsst_solution_cost(inst, apps::second_stage_complete(inst, forest));
      });
      rows.push_back(t);
    }
  }

  std::string csv = "suite,size,stage,mean_ms\n";
  std::printf("%-11s %6s %12s %12s %12s %12s\n", "suite", "size", "features", "encoder", "oracle", "decode");
  for (const StageTimes& t : rows) {
    std::printf("%-11s %6ld %12.5f %12.5f %12.5f %12.5f\n", t.suite.c_str(), static_cast<long>(t.size),
                t.features, t.encoder, t.oracle, t.decode);
    const std::string prefix = t.suite + "," + std::to_string(t.size) + ",";
    csv += prefix + "features," + io::format_double(t.features) + "\n";
    csv += prefix + "encoder," + io::format_double(t.encoder) + "\n";
    csv += prefix + "oracle," + io::format_double(t.oracle) + "\n";
    csv += prefix + "decode," + io::format_double(t.decode) + "\n";
  }
  io::write_text(o.out, csv);
  Outputs out;
  out.volatile_files = {o.out};
  out.config["suite"] = o.suite;
  out.config["reps"] = o.reps;
  return out;
}

}  // namespace colayers::cli
