#pragma once

// Linear encoders trained by hand-chained gradients: features -> theta ->
// structured loss -> d loss / d theta -> d loss / d w -> Adam.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "colayers/core.hpp"
#include "colayers/losses.hpp"

namespace colayers {

// Optional squashing of the linear score. negative_softplus keeps theta
// strictly negative, which multiplicative layers over Dijkstra-type oracles
// need.
enum class OutputActivation { identity, negative_softplus };

const char* to_string(OutputActivation a);
OutputActivation activation_from_string(const std::string& name);

struct GlmModel {
  Vector weights;  // one per feature column
  double bias = 0.0;
  bool use_bias = false;
  OutputActivation activation = OutputActivation::identity;

  static GlmModel zeros(Index features, bool use_bias = false,
                        OutputActivation activation = OutputActivation::identity);

  Index parameter_count() const { return weights.size() + (use_bias ? 1 : 0); }
  // [weights; bias]
  Vector parameters() const;
  void set_parameters(const Vector& params);
};

// theta = act(features * w + bias); features is d x p.
Objective glm_forward(const GlmModel& model, const Matrix& features);

// Gradient with respect to the parameters ([w; bias]) given d loss / d theta.
Vector glm_backward(const GlmModel& model, const Matrix& features, const Vector& upstream);

// Per-column scales from the train split. Zero-variance columns keep scale 1.
struct FeatureScaler {
  Vector scales;

  static FeatureScaler fit(const std::vector<Matrix>& train_features);
  Matrix normalize(const Matrix& features) const;
  Matrix denormalize(const Matrix& features) const;
  // Weights acting on raw features that reproduce a model trained on
  // normalized ones.
  GlmModel to_raw_model(const GlmModel& normalized_model) const;
};

struct AdamConfig {
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  Vector first_moment;
  Vector second_moment;
  long step = 0;

  static AdamState zeros(Index n);
};

// One bias-corrected Adam update of `params` in place.
void adam_step(Vector& params, AdamState& state, const Vector& gradient, const AdamConfig& cfg);

enum class LossKind { fy_add, fy_mult, fy_reg, spo_plus, ssvm, regret_add, regret_mult };

const char* to_string(LossKind kind);
LossKind loss_from_string(const std::string& name);
bool is_experience_loss(LossKind kind);
bool is_multiplicative_loss(LossKind kind);

// One training example. Which optional fields are needed depends on the loss.
struct Sample {
  Matrix features;  // d x p
  CoOracle oracle;
  std::optional<Vertex> target_solution;
  std::optional<Objective> target_objective;
  BlackBoxCost cost;
  std::optional<LossAugmentedSolver> ssvm_solver;
  // Quality of the decoded prediction for theta (lower is better), used for
  // model selection.
  std::function<double(const Objective&)> gap;
};

struct TrainConfig {
  int epochs = 10;
  int batch_size = 1;
  AdamConfig adam;
  std::uint64_t seed = 0;
  LossKind loss = LossKind::fy_add;
  double epsilon = 1.0;
  int nb_samples = 20;
  FrankWolfeConfig frank_wolfe;
  bool use_bias = false;
  OutputActivation activation = OutputActivation::identity;
  std::optional<GlmModel> initial_model;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_gap = 0.0;  // NaN when the validation samples carry no gap
};

struct TrainResult {
  GlmModel model;       // best validation epoch
  GlmModel last_model;  // after the final epoch
  int best_epoch = 0;
  std::vector<EpochRecord> history;  // epoch 0 is the initial model
  // Training steps whose inner Frank-Wolfe run missed its gap tolerance.
  int unconverged_steps = 0;
};

// Loss of one sample at theta. `seed` keys the perturbation noise.
LossResult evaluate_loss(const Sample& sample, const Objective& theta, const TrainConfig& cfg,
                         std::uint64_t seed);

// Throws ConfigError when a sample lacks a field the loss needs.
void check_samples(const std::vector<Sample>& samples, const TrainConfig& cfg);

TrainResult train(const std::vector<Sample>& train_set, const std::vector<Sample>& validation_set,
                  const TrainConfig& cfg);

// Mean loss and mean gap of a model over a set with fixed evaluation seeds.
struct Evaluation {
  double loss = 0.0;
  double gap = 0.0;
};
Evaluation evaluate_model(const GlmModel& model, const std::vector<Sample>& samples,
                          const TrainConfig& cfg);

// Trains once per candidate epsilon and keeps the best validation score.
struct EpsilonSearchResult {
  double epsilon = 0.0;
  TrainResult result;
  std::vector<std::pair<double, double>> scores;  // (epsilon, score)
};
EpsilonSearchResult grid_search_epsilon(const std::vector<Sample>& train_set,
                                        const std::vector<Sample>& validation_set,
                                        TrainConfig cfg, const std::vector<double>& candidates);

}  // namespace colayers
