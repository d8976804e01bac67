#include "colayers/learn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "colayers/rng.hpp"

namespace colayers {

const char* to_string(OutputActivation a) {
  return a == OutputActivation::identity ? "identity" : "negative_softplus";
}

OutputActivation activation_from_string(const std::string& name) {
  if (name == "identity") return OutputActivation::identity;
  if (name == "negative_softplus") return OutputActivation::negative_softplus;
  throw ConfigError("unknown output activation '" + name + "'");
}

GlmModel GlmModel::zeros(Index features, bool use_bias, OutputActivation activation) {
  GlmModel m;
  m.weights = Vector::Zero(features);
  m.use_bias = use_bias;
  m.activation = activation;
  return m;
}

Vector GlmModel::parameters() const {
  Vector p(parameter_count());
  p.head(weights.size()) = weights;
  if (use_bias) p[weights.size()] = bias;
  return p;
}

void GlmModel::set_parameters(const Vector& params) {
  require_same_size(params.size(), parameter_count(), "GlmModel::set_parameters");
  weights = params.head(weights.size());
  if (use_bias) bias = params[weights.size()];
}

namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

Vector linear_score(const GlmModel& model, const Matrix& features) {
  require_same_size(features.cols(), model.weights.size(), "glm feature count");
  Vector s = features * model.weights;
  if (model.use_bias) s.array() += model.bias;
  return s;
}

}  // namespace

Objective glm_forward(const GlmModel& model, const Matrix& features) {
  Vector s = linear_score(model, features);
  if (model.activation == OutputActivation::negative_softplus) {
    for (Index i = 0; i < s.size(); ++i) s[i] = -softplus(s[i]);
  }
  return s;
}

Vector glm_backward(const GlmModel& model, const Matrix& features, const Vector& upstream) {
  require_same_size(features.rows(), upstream.size(), "glm_backward upstream");
  Vector local = upstream;
  if (model.activation == OutputActivation::negative_softplus) {
    const Vector s = linear_score(model, features);
    for (Index i = 0; i < s.size(); ++i) local[i] *= -sigmoid(s[i]);
  } else {
    require_same_size(features.cols(), model.weights.size(), "glm feature count");
  }
  Vector grad(model.parameter_count());
  grad.head(model.weights.size()) = features.transpose() * local;
  if (model.use_bias) grad[model.weights.size()] = local.sum();
  return grad;
}

FeatureScaler FeatureScaler::fit(const std::vector<Matrix>& train_features) {
  if (train_features.empty()) throw DataError("FeatureScaler::fit: empty train split");
  const Index p = train_features.front().cols();
  Vector sum = Vector::Zero(p);
  Vector sum_sq = Vector::Zero(p);
  double rows = 0.0;
  for (const Matrix& x : train_features) {
    require_same_size(x.cols(), p, "FeatureScaler::fit");
    sum += x.colwise().sum().transpose();
    rows += static_cast<double>(x.rows());
  }
  const Vector mean = sum / rows;
  for (const Matrix& x : train_features) {
    sum_sq += (x.rowwise() - mean.transpose()).colwise().squaredNorm().transpose();
  }
  FeatureScaler scaler;
  scaler.scales.resize(p);
  for (Index j = 0; j < p; ++j) {
    const double sd = rows > 1.0 ? std::sqrt(sum_sq[j] / (rows - 1.0)) : 0.0;
    scaler.scales[j] = sd > 1e-12 ? sd : 1.0;
  }
  return scaler;
}

Matrix FeatureScaler::normalize(const Matrix& features) const {
  require_same_size(features.cols(), scales.size(), "FeatureScaler::normalize");
  return features * scales.cwiseInverse().asDiagonal();
}

Matrix FeatureScaler::denormalize(const Matrix& features) const {
  require_same_size(features.cols(), scales.size(), "FeatureScaler::denormalize");
  return features * scales.asDiagonal();
}

GlmModel FeatureScaler::to_raw_model(const GlmModel& normalized_model) const {
  GlmModel raw = normalized_model;
  raw.weights = normalized_model.weights.cwiseQuotient(scales);
  return raw;
}

AdamState AdamState::zeros(Index n) { return {Vector::Zero(n), Vector::Zero(n), 0}; }

void adam_step(Vector& params, AdamState& state, const Vector& gradient, const AdamConfig& cfg) {
  require_same_size(params.size(), gradient.size(), "adam_step");
  require_same_size(params.size(), state.first_moment.size(), "adam_step state");
  ++state.step;
  state.first_moment = cfg.beta1 * state.first_moment + (1.0 - cfg.beta1) * gradient;
  state.second_moment =
      cfg.beta2 * state.second_moment + (1.0 - cfg.beta2) * gradient.cwiseAbs2();
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (Index i = 0; i < params.size(); ++i) {
    const double m_hat = state.first_moment[i] / c1;
    const double v_hat = state.second_moment[i] / c2;
    params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

const char* to_string(LossKind kind) {
  switch (kind) {
    case LossKind::fy_add: return "fy_add";
    case LossKind::fy_mult: return "fy_mult";
    case LossKind::fy_reg: return "fy_reg";
    case LossKind::spo_plus: return "spo_plus";
    case LossKind::ssvm: return "ssvm";
    case LossKind::regret_add: return "regret_add";
    case LossKind::regret_mult: return "regret_mult";
  }
  return "unknown";
}

LossKind loss_from_string(const std::string& name) {
  for (LossKind k : {LossKind::fy_add, LossKind::fy_mult, LossKind::fy_reg, LossKind::spo_plus,
                     LossKind::ssvm, LossKind::regret_add, LossKind::regret_mult}) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError("unknown loss '" + name + "'");
}

bool is_experience_loss(LossKind kind) {
  return kind == LossKind::regret_add || kind == LossKind::regret_mult;
}

bool is_multiplicative_loss(LossKind kind) {
  return kind == LossKind::fy_mult || kind == LossKind::regret_mult;
}

void TrainConfig::validate() const {
  if (epochs < 0) throw ConfigError("TrainConfig: epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
  if (adam.learning_rate < 0.0) throw ConfigError("TrainConfig: learning rate must be >= 0");
  if (!(epsilon > 0.0)) throw ConfigError("TrainConfig: epsilon must be > 0");
  if (nb_samples < 1) throw ConfigError("TrainConfig: nb_samples must be >= 1");
  if (is_multiplicative_loss(loss) && activation == OutputActivation::identity) {
    throw ConfigError(std::string("loss ") + to_string(loss) +
                      " needs a sign-definite encoder output (activation negative_softplus)");
  }
}

void check_samples(const std::vector<Sample>& samples, const TrainConfig& cfg) {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    auto fail = [&](const char* what) {
      std::ostringstream msg;
      msg << "sample " << i << " lacks " << what << " required by loss " << to_string(cfg.loss);
      throw ConfigError(msg.str());
    };
    if (!s.oracle.solve) fail("an oracle");
    switch (cfg.loss) {
      case LossKind::fy_add:
      case LossKind::fy_mult:
      case LossKind::fy_reg:
      case LossKind::ssvm:
        if (!s.target_solution) fail("a target solution");
        break;
      case LossKind::spo_plus:
        if (!s.target_objective) fail("a target objective");
        break;
      case LossKind::regret_add:
      case LossKind::regret_mult:
        if (!s.cost) fail("a cost function");
        break;
    }
  }
}

LossResult evaluate_loss(const Sample& sample, const Objective& theta, const TrainConfig& cfg,
                         std::uint64_t seed) {
  const PerturbationConfig pert{cfg.epsilon, cfg.nb_samples, seed, false};
  switch (cfg.loss) {
    case LossKind::fy_add:
      return fy_loss_perturbed_additive(theta, *sample.target_solution, pert, sample.oracle);
    case LossKind::fy_mult:
      return fy_loss_perturbed_multiplicative(theta, *sample.target_solution, pert, sample.oracle);
    case LossKind::fy_reg:
      return fy_loss_regularized(theta, *sample.target_solution, half_squared_norm(),
                                 sample.oracle, cfg.frank_wolfe);
    case LossKind::spo_plus:
      return spo_plus_loss(theta, Target{sample.target_solution, sample.target_objective},
                           sample.oracle);
    case LossKind::ssvm:
      return ssvm_loss(theta, *sample.target_solution,
                       sample.ssvm_solver ? *sample.ssvm_solver : hamming_solver(sample.oracle));
    case LossKind::regret_add:
      return expected_regret_additive(theta, sample.cost, pert, sample.oracle);
    case LossKind::regret_mult:
      return expected_regret_multiplicative(theta, sample.cost, pert, sample.oracle);
  }
  throw ConfigError("unhandled loss kind");
}

namespace {

std::uint64_t evaluation_seed(std::uint64_t base, std::size_t index) {
  return splitmix64_mix(base ^ splitmix64_mix(0xe7a1u + index));
}

std::uint64_t training_seed(std::uint64_t base, int epoch, std::size_t index) {
  return splitmix64_mix(splitmix64_mix(base + static_cast<std::uint64_t>(epoch) * 0x9e37u) ^
                        (index * 0xc2b2ae3d27d4eb4fULL));
}

}  // namespace

Evaluation evaluate_model(const GlmModel& model, const std::vector<Sample>& samples,
                          const TrainConfig& cfg) {
  Evaluation ev;
  if (samples.empty()) {
    ev.loss = ev.gap = std::numeric_limits<double>::quiet_NaN();
    return ev;
  }
  const auto n = static_cast<std::ptrdiff_t>(samples.size());
  std::vector<double> losses(samples.size());
  std::vector<double> gaps(samples.size(), std::numeric_limits<double>::quiet_NaN());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const auto idx = static_cast<std::size_t>(i);
      const Sample& s = samples[idx];
      const Objective theta = glm_forward(model, s.features);
      losses[idx] = evaluate_loss(s, theta, cfg, evaluation_seed(cfg.seed, idx)).value;
      if (s.gap) gaps[idx] = s.gap(theta);
    } catch (...) {
#pragma omp critical(colayers_eval_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  // Fixed-order reductions.
  ev.loss = std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(n);
  ev.gap = std::accumulate(gaps.begin(), gaps.end(), 0.0) / static_cast<double>(n);
  return ev;
}

TrainResult train(const std::vector<Sample>& train_set, const std::vector<Sample>& validation_set,
                  const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.empty()) throw DataError("train: empty train set");
  check_samples(train_set, cfg);
  check_samples(validation_set, cfg);

  const Index p = train_set.front().features.cols();
  GlmModel model = cfg.initial_model ? *cfg.initial_model
                                     : GlmModel::zeros(p, cfg.use_bias, cfg.activation);
  require_same_size(model.weights.size(), p, "train: initial model");

  const std::vector<Sample>& selection_set = validation_set.empty() ? train_set : validation_set;
  const bool select_by_gap =
      std::all_of(selection_set.begin(), selection_set.end(), [](const Sample& s) { return bool(s.gap); });

  TrainResult result;
  auto record = [&](int epoch) {
    const Evaluation tr = evaluate_model(model, train_set, cfg);
    const Evaluation va = validation_set.empty() ? tr : evaluate_model(model, validation_set, cfg);
    result.history.push_back({epoch, tr.loss, va.loss, va.gap});
    return select_by_gap ? va.gap : va.loss;
  };

  double best_score = record(0);
  result.model = model;
  result.best_epoch = 0;

  Vector params = model.parameters();
  AdamState adam = AdamState::zeros(params.size());
  std::mt19937_64 shuffler(cfg.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    // Fisher-Yates with our own index draw keeps the order independent of
    // the standard library's distribution implementation.
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(shuffler() % i)]);
    }
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<Vector> grads(stop - start);
      for (std::size_t b = start; b < stop; ++b) {
        const Sample& s = train_set[order[b]];
        const Objective theta = glm_forward(model, s.features);
        const LossResult loss = evaluate_loss(s, theta, cfg, training_seed(cfg.seed, epoch, order[b]));
        if (!loss.converged) ++result.unconverged_steps;
        grads[b - start] = glm_backward(model, s.features, loss.gradient);
      }
      Vector mean_grad = Vector::Zero(params.size());
      for (const Vector& g : grads) mean_grad += g;
      mean_grad /= static_cast<double>(grads.size());
      adam_step(params, adam, mean_grad, cfg.adam);
      model.set_parameters(params);
    }
    const double score = record(epoch);
    if (score < best_score) {
      best_score = score;
      result.model = model;
      result.best_epoch = epoch;
    }
  }
  result.last_model = model;
  return result;
}

EpsilonSearchResult grid_search_epsilon(const std::vector<Sample>& train_set,
                                        const std::vector<Sample>& validation_set,
                                        TrainConfig cfg, const std::vector<double>& candidates) {
  if (candidates.empty()) throw ConfigError("grid_search_epsilon: no candidates");
  EpsilonSearchResult out;
  double best = std::numeric_limits<double>::infinity();
  for (double eps : candidates) {
    cfg.epsilon = eps;
    TrainResult r = train(train_set, validation_set, cfg);
    const EpochRecord& rec = r.history[static_cast<std::size_t>(r.best_epoch)];
    const double score = std::isnan(rec.val_gap) ? rec.val_loss : rec.val_gap;
    out.scores.emplace_back(eps, score);
    if (score < best) {
      best = score;
      out.epsilon = eps;
      out.result = std::move(r);
    }
  }
  return out;
}

}  // namespace colayers
