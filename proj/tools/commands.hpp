#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "colayers/io.hpp"

namespace colayers::cli {

struct Options {
  std::string command;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out;

  std::string app;  // empty: taken from the dataset or checkpoint

  // generate
  int count = 10;
  int k = 12;
  int features = 5;
  double noise = 0.0;
  std::string connectivity = "acyclic";
  int min_jobs = 8;
  int max_jobs = 8;
  int width = 4;
  int scenarios = 5;
  double cap = 20.0;
  bool label = false;
  int lagrangian_iterations = 5000;

  // train / eval
  std::string data;
  std::string model;
  std::string bounds;
  std::string history;
  std::string loss;
  std::optional<double> epsilon;
  std::optional<int> nb_samples;
  std::optional<int> epochs;
  std::optional<int> batch_size;
  std::optional<double> lr;
  std::optional<std::string> activation;
  std::optional<bool> bias;
  double val_fraction = 0.25;

  // bench
  std::string suite = "all";
  int reps = 5;
};

// Files written by a command. `volatile_files` hold wall-clock timings and
// are excluded from replay comparisons.
struct Outputs {
  std::vector<std::string> files;
  std::vector<std::string> volatile_files;
  io::Json config;
  int exit_code = 0;
};

Outputs cmd_generate(const Options& o);
Outputs cmd_train(const Options& o);
Outputs cmd_eval(const Options& o);
Outputs cmd_bench(const Options& o);

}  // namespace colayers::cli
