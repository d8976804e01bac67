#include "colayers/losses.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace colayers {

namespace {

void require_target(const Objective& theta, const Vertex& target, const char* who) {
  require_finite(theta, who);
  require_same_size(theta.size(), target.size(), who);
}

double checked_cost(const BlackBoxCost& cost, const Vertex& v) {
  const double value = cost(v);
  if (!std::isfinite(value)) {
    std::ostringstream msg;
    msg << "cost function returned " << value << " on vertex [" << v.transpose() << "]";
    throw DataError(msg.str());
  }
  return value;
}

}  // namespace

LossResult fy_loss_perturbed_additive(const Objective& theta, const Vertex& target,
                                      const PerturbationConfig& cfg, const CoOracle& oracle) {
  require_target(theta, target, "fy_loss_perturbed_additive");
  const auto s = sample_perturbed_solutions(theta, cfg, oracle, PerturbationMode::additive);
  return {fenchel_value_from(s) - theta.dot(target), expectation_from(s) - target, true};
}

LossResult fy_loss_perturbed_multiplicative(const Objective& theta, const Vertex& target,
                                            const PerturbationConfig& cfg, const CoOracle& oracle) {
  require_target(theta, target, "fy_loss_perturbed_multiplicative");
  const auto s = sample_perturbed_solutions(theta, cfg, oracle, PerturbationMode::multiplicative);
  return {fenchel_value_from(s) - theta.dot(target),
          scaled_expectation_from(s, cfg.epsilon) - target, true};
}

LossResult fy_loss_regularized(const Objective& theta, const Vertex& target,
                               const Regularizer& omega, const CoOracle& oracle,
                               const FrankWolfeConfig& fw) {
  require_target(theta, target, "fy_loss_regularized");
  const FrankWolfeResult layer = frank_wolfe_layer(theta, omega, oracle, fw);
  const Moment& mu = layer.moment;
  const double value =
      (theta.dot(mu) - omega.value(mu)) - (theta.dot(target) - omega.value(target));
  return {value, mu - target, layer.converged};
}

LossResult spo_plus_loss(const Objective& theta, const Target& target, const CoOracle& oracle) {
  if (!target.objective) throw ConfigError("spo_plus_loss needs the true objective in its target");
  const Objective& truth = *target.objective;
  require_finite(theta, "spo_plus_loss");
  require_same_size(theta.size(), truth.size(), "spo_plus_loss");
  const Vertex y_bar = target.solution ? *target.solution : oracle(truth);
  require_same_size(theta.size(), y_bar.size(), "spo_plus_loss");

  const Objective shifted = 2.0 * theta - truth;
  const Vertex y = oracle(shifted);
  return {shifted.dot(y) - shifted.dot(y_bar), 2.0 * (y - y_bar), true};
}

double hamming_distance(const Vertex& a, const Vertex& b) {
  require_same_size(a.size(), b.size(), "hamming_distance");
  double count = 0.0;
  for (Index i = 0; i < a.size(); ++i) count += a[i] != b[i] ? 1.0 : 0.0;
  return count;
}

LossResult ssvm_loss(const Objective& theta, const Vertex& target,
                     const LossAugmentedSolver& solver) {
  require_target(theta, target, "ssvm_loss");
  const Vertex y = solver.solve(theta, target);
  require_same_size(y.size(), target.size(), "ssvm_loss solver output");
  return {solver.base_loss(y, target) + theta.dot(y - target), y - target, true};
}

Vertex ssvm_hamming_simplex_solver(const Objective& theta, const Vertex& target) {
  require_target(theta, target, "ssvm_hamming_simplex_solver");
  Index target_index = -1;
  for (Index i = 0; i < target.size(); ++i) {
    if (target[i] == 1.0 && target_index < 0) {
      target_index = i;
    } else if (target[i] != 0.0) {
      target_index = -2;
      break;
    }
  }
  if (target_index < 0) throw DataError("ssvm_hamming_simplex_solver: target is not a basis vector");

  Index best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < theta.size(); ++i) {
    const double hamming = i == target_index ? 0.0 : 2.0;
    const double score = hamming + theta[i] - theta[target_index];
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return Vertex::Unit(theta.size(), best);
}

LossAugmentedSolver simplex_hamming_solver() {
  return {ssvm_hamming_simplex_solver, hamming_distance};
}

LossAugmentedSolver hamming_solver(const CoOracle& oracle) {
  return {[oracle](const Objective& theta, const Vertex& target) {
            return oracle(Objective(theta.array() + 1.0 - 2.0 * target.array()));
          },
          hamming_distance};
}

LossAugmentedSolver permutation_distance_solver(const CoOracle& oracle) {
  return {[oracle](const Objective& theta, const Vertex& target) {
            return oracle(Objective(theta - target));
          },
          [](const Vertex& y, const Vertex& target) { return 0.5 * (y - target).squaredNorm(); }};
}

LossResult generic_imitation_loss(const Objective& theta, const Target& target,
                                  const GenericImitationLoss& loss) {
  if (!target.solution) throw ConfigError("generic_imitation_loss needs a target solution");
  const Vertex& y_bar = *target.solution;
  require_target(theta, y_bar, "generic_imitation_loss");
  const Vector y = loss.maximizer(theta, target);
  require_same_size(y.size(), y_bar.size(), "generic_imitation_loss maximizer output");
  double value = loss.base_loss(y, target) + theta.dot(y - y_bar);
  if (loss.omega) value -= loss.omega->value(y) - loss.omega->value(y_bar);
  return {value, y - y_bar, true};
}

namespace {

LossResult perturbed_regret(const Objective& theta, const BlackBoxCost& cost,
                            const PerturbationConfig& cfg, const CoOracle& oracle,
                            PerturbationMode mode, bool control_variate) {
  const auto s = sample_perturbed_solutions(theta, cfg, oracle, mode);
  const double baseline = control_variate ? checked_cost(cost, oracle(theta)) : 0.0;
  const Index samples = s.solutions.rows();
  double value = 0.0;
  Vector grad = Vector::Zero(theta.size());
  for (Index m = 0; m < samples; ++m) {
    const double c = checked_cost(cost, s.solutions.row(m).transpose());
    value += c;
    grad += (c - baseline) * s.noise.row(m).transpose();
  }
  grad /= cfg.epsilon * static_cast<double>(samples);
  if (mode == PerturbationMode::multiplicative) grad = grad.cwiseQuotient(theta);
  return {value / static_cast<double>(samples), grad, true};
}

}  // namespace

LossResult expected_regret_additive(const Objective& theta, const BlackBoxCost& cost,
                                    const PerturbationConfig& cfg, const CoOracle& oracle,
                                    bool control_variate) {
  return perturbed_regret(theta, cost, cfg, oracle, PerturbationMode::additive, control_variate);
}

LossResult expected_regret_multiplicative(const Objective& theta, const BlackBoxCost& cost,
                                          const PerturbationConfig& cfg, const CoOracle& oracle,
                                          bool control_variate) {
  return perturbed_regret(theta, cost, cfg, oracle, PerturbationMode::multiplicative,
                          control_variate);
}

LossResult expected_regret_regularized(const Objective& theta, const BlackBoxCost& cost,
                                       const Regularizer& omega, const CoOracle& oracle,
                                       const FrankWolfeConfig& fw) {
  const RegularizedJacobian rj = regularized_jacobian(theta, omega, oracle, fw);
  const auto& atoms = rj.layer.distribution.atoms();
  Vector costs(static_cast<Index>(atoms.size()));
  double value = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    costs[static_cast<Index>(i)] = checked_cost(cost, atoms[i].vertex);
    value += atoms[i].weight * costs[static_cast<Index>(i)];
  }
  LossResult out{value, Vector(), rj.layer.converged};
  if (rj.implicit) {
    out.gradient = rj.weight_jacobian.transpose() * costs;
    return out;
  }
  // Singular active set: differentiate the value numerically.
  const double h = 1e-5;
  out.gradient.resize(theta.size());
  auto value_at = [&](const Objective& t) {
    const FrankWolfeResult layer = frank_wolfe_layer(t, omega, oracle, fw);
    double v = 0.0;
    for (const Atom& a : layer.distribution.atoms()) v += a.weight * checked_cost(cost, a.vertex);
    return v;
  };
  for (Index j = 0; j < theta.size(); ++j) {
    Objective up = theta;
    Objective down = theta;
    up[j] += h;
    down[j] -= h;
    out.gradient[j] = (value_at(up) - value_at(down)) / (2.0 * h);
  }
  return out;
}

Matrix pushforward_jacobian(const Objective& theta, const VectorCost& cost,
                            const PerturbationConfig& cfg, const CoOracle& oracle,
                            PerturbationMode mode, bool control_variate) {
  const auto s = sample_perturbed_solutions(theta, cfg, oracle, mode);
  const Vector first = cost(s.solutions.row(0).transpose());
  const Vector baseline = control_variate ? cost(oracle(theta)) : Vector::Zero(first.size());
  require_same_size(baseline.size(), first.size(), "pushforward_jacobian");
  Matrix jac = Matrix::Zero(first.size(), theta.size());
  for (Index m = 0; m < s.solutions.rows(); ++m) {
    const Vector c = m == 0 ? first : cost(s.solutions.row(m).transpose());
    require_same_size(c.size(), first.size(), "pushforward_jacobian");
    jac.noalias() += (c - baseline) * s.noise.row(m);
  }
  jac /= cfg.epsilon * static_cast<double>(s.solutions.rows());
  if (mode == PerturbationMode::multiplicative) jac = jac * theta.cwiseInverse().asDiagonal();
  return jac;
}

}  // namespace colayers
