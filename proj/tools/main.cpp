// colayers command-line front end.
//
//   colayers generate --app grid --count 10 --k 4 --seed 7 --out data/grid.json
//   colayers train --data data/grid.json --loss fy_add --out runs/model.json
//   colayers eval --model runs/model.json --data data/grid.json --out runs/metrics.csv
//   colayers bench --suite all --out runs/bench.csv
//   colayers --from-manifest runs/model.manifest.json [--threads 8]
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
// failure.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using colayers::cli::Options;
using colayers::cli::Outputs;
using colayers::io::Json;

constexpr const char* kVersion = "0.3.0";

enum ExitCode { kOk = 0, kConfig = 2, kData = 3, kNumerical = 4 };

struct Parsed {
  Options options;
  std::string manifest;
  std::string from_manifest;
  bool seed_given = false;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--out", o.out, "Output file");
}

void add_hyper(CLI::App* cmd, Options& o) {
  cmd->add_option("--app", o.app, "grid, scheduling or tsst (default: from the data)");
  cmd->add_option("--data", o.data, "Dataset file written by generate");
  cmd->add_option("--bounds", o.bounds, "TSST bounds cache (default: <data>.bounds.json)");
  cmd->add_option("--lagrangian-iterations", o.lagrangian_iterations,
                  "Ascent iterations for TSST bounds missing from the cache");
}

// Parses argv into options; throws CLI::ParseError on bad input.
Parsed parse(const std::vector<std::string>& args, CLI::App& app) {
  Parsed p;
  Options& o = p.options;
  app.require_subcommand(0, 1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);
  app.add_option("--seed", o.seed, "Random seed")->envname("COLAYERS_SEED");
  app.add_option("--threads", o.threads, "OpenMP threads")->check(CLI::PositiveNumber);
  app.add_option("--manifest", p.manifest, "Manifest path (default: <out>.manifest.json)");
  app.add_option("--from-manifest", p.from_manifest, "Replay the run recorded in a manifest");

  CLI::App* gen = app.add_subcommand("generate", "Write a synthetic dataset");
  add_common(gen, o);
  gen->add_option("--app", o.app, "grid, scheduling or tsst")->check(CLI::IsMember({"grid", "scheduling", "tsst"}));
  gen->add_option("--count", o.count, "Number of instances");
  gen->add_option("--k", o.k, "Grid side (grid)");
  gen->add_option("--features", o.features, "Features per cell (grid)");
  gen->add_option("--noise", o.noise, "Cost noise scale (grid)");
  gen->add_option("--connectivity", o.connectivity, "four, eight or acyclic (grid)");
  auto* jobs = gen->add_option_function<int>(
      "--jobs", [&o](int n) { o.min_jobs = o.max_jobs = n; }, "Jobs per instance (scheduling)");
  gen->add_option("--min-jobs", o.min_jobs, "Smallest job count (scheduling)")->excludes(jobs);
  gen->add_option("--max-jobs", o.max_jobs, "Largest job count (scheduling)")->excludes(jobs);
  gen->add_option("--width", o.width, "Grid graph width (tsst)");
  gen->add_option("--scenarios", o.scenarios, "Scenario count (tsst)");
  gen->add_option("--cap", o.cap, "Second-stage cost cap (tsst)");
  gen->add_flag("--label", o.label, "Compute Lagrangian bounds and heuristic labels (tsst)");
  gen->add_option("--bounds", o.bounds, "Bounds file (default: <out>.bounds.json)");
  gen->add_option("--lagrangian-iterations", o.lagrangian_iterations, "Ascent iterations (tsst)");

  CLI::App* tr = app.add_subcommand("train", "Train a GLM encoder");
  add_common(tr, o);
  add_hyper(tr, o);
  tr->add_option("--loss", o.loss, "fy_add, fy_mult, fy_reg, spo_plus, ssvm, regret_add or regret_mult");
  tr->add_option("--epsilon", o.epsilon, "Perturbation scale");
  tr->add_option("--nb-samples", o.nb_samples, "Monte-Carlo samples");
  tr->add_option("--epochs", o.epochs, "Epochs");
  tr->add_option("--batch-size", o.batch_size, "Batch size");
  tr->add_option("--lr", o.lr, "Adam learning rate");
  tr->add_option("--activation", o.activation, "identity or negative_softplus");
  tr->add_option("--bias", o.bias, "Learn a bias term (true/false)");
  tr->add_option("--val-fraction", o.val_fraction, "Trailing share of instances used for validation");
  tr->add_option("--history", o.history, "History CSV (default: <out>.history.csv)");

  CLI::App* ev = app.add_subcommand("eval", "Evaluate a trained model");
  add_common(ev, o);
  add_hyper(ev, o);
  ev->add_option("--model", o.model, "Checkpoint written by train");

  CLI::App* be = app.add_subcommand("bench", "Time the pipeline stages");
  add_common(be, o);
  be->add_option("--suite", o.suite, "grid, scheduling, tsst or all");
  be->add_option("--reps", o.reps, "Repetitions per measurement");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  app.parse(reversed);
  for (CLI::App* sub : {gen, tr, ev, be}) {
    if (sub->parsed()) o.command = sub->get_name();
  }
  p.seed_given = app.count("--seed") > 0 || std::getenv("COLAYERS_SEED") != nullptr;
  return p;
}

// Arguments that define the run, without thread count and manifest options.
std::vector<std::string> replay_arguments(const std::vector<std::string>& args, std::uint64_t seed) {
  std::vector<std::string> out;
  bool has_seed = false;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    auto takes_value = [&](const char* name) {
      return a == name || a.rfind(std::string(name) + "=", 0) == 0;
    };
    if (takes_value("--threads") || takes_value("--manifest") || takes_value("--from-manifest")) {
      if (a.find('=') == std::string::npos) ++i;
      continue;
    }
    if (takes_value("--seed")) has_seed = true;
    out.push_back(a);
  }
  if (!has_seed) {
    out.insert(out.begin(), std::to_string(seed));
    out.insert(out.begin(), "--seed");
  }
  return out;
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

int run(std::vector<std::string> args) {
  Parsed parsed;
  {
    CLI::App app{"colayers: probabilistic combinatorial optimization layers"};
    try {
      parsed = parse(args, app);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e);
      return code == 0 ? kOk : kConfig;
    }
  }

  if (!parsed.from_manifest.empty()) {
    const Json manifest = colayers::io::read_json(parsed.from_manifest);
    if (manifest.value("schema", "") != colayers::io::kManifestSchema) {
      throw colayers::DataError("'" + parsed.from_manifest + "' is not a run manifest");
    }
    std::vector<std::string> replay = manifest.at("argv").get<std::vector<std::string>>();
    // Options given next to --from-manifest (typically --threads) win.
    std::vector<std::string> extra;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--from-manifest") {
        ++i;
        continue;
      }
      if (args[i].rfind("--from-manifest=", 0) == 0) continue;
      extra.push_back(args[i]);
    }
    replay.insert(replay.begin(), extra.begin(), extra.end());
    return run(replay);
  }

  Options& o = parsed.options;
  if (o.command.empty()) {
    std::cerr << "no command given; see --help\n";
    return kConfig;
  }
  omp_set_num_threads(o.threads);

  const auto start = std::chrono::steady_clock::now();
  const std::string started_at = utc_now();
  Outputs outputs;
  if (o.command == "generate") outputs = colayers::cli::cmd_generate(o);
  if (o.command == "train") outputs = colayers::cli::cmd_train(o);
  if (o.command == "eval") outputs = colayers::cli::cmd_eval(o);
  if (o.command == "bench") outputs = colayers::cli::cmd_bench(o);
  const double elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  Json manifest;
  manifest["schema"] = colayers::io::kManifestSchema;
  manifest["version"] = kVersion;
  manifest["command"] = o.command;
  manifest["argv"] = replay_arguments(args, o.seed);
  manifest["seed"] = o.seed;
  manifest["seed_source"] = parsed.seed_given ? "explicit" : "default";
  manifest["threads"] = o.threads;
  manifest["config"] = outputs.config;
  manifest["outputs"] = outputs.files;
  manifest["volatile_outputs"] = outputs.volatile_files;
  manifest["started_at"] = started_at;
  manifest["elapsed_ms"] = elapsed_ms;
  manifest["exit_code"] = outputs.exit_code;
  const std::filesystem::path out_path(o.out);
  const std::string manifest_path =
      !parsed.manifest.empty()
          ? parsed.manifest
          : (out_path.parent_path() / (out_path.stem().string() + ".manifest.json")).string();
  colayers::io::write_json(manifest_path, manifest);
  return outputs.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(std::vector<std::string>(argv + 1, argv + argc));
  } catch (const colayers::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfig;
  } catch (const colayers::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const colayers::Error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
}
