#include "colayers/perturbation.hpp"

#include <cmath>
#include <sstream>

namespace colayers {

const char* to_string(PerturbationMode mode) {
  return mode == PerturbationMode::additive ? "additive" : "multiplicative";
}

void PerturbationConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ConfigError("PerturbationConfig: epsilon must be a positive finite number");
  }
  if (nb_samples < 1) throw ConfigError("PerturbationConfig: nb_samples must be >= 1");
}

Vector multiplicative_factor(const Vector& z, double epsilon) {
  return (epsilon * z.array() - 0.5 * epsilon * epsilon).exp().matrix();
}

Matrix noise_matrix(const PerturbationConfig& cfg, Index d) {
  cfg.validate();
  // Noise only: an oracle that ignores its input is enough to drive the kernel.
  CoOracle zero;
  zero.solve = [d](const Objective&) { return Vertex::Zero(d); };
  return reference::sample_perturbed_solutions_serial(Objective::Ones(d), cfg, zero,
                                                      PerturbationMode::additive)
      .noise;
}

void validate_perturbation_input(const Objective& theta, const CoOracle& oracle,
                                 PerturbationMode mode) {
  require_finite(theta, "perturbed layer");
  if (mode == PerturbationMode::additive) {
    if (oracle.sign_domain != SignDomain::any) {
      throw ConfigError("additive perturbation needs a sign-free oracle, '" + oracle.name +
                        "' requires " + to_string(oracle.sign_domain) + " objectives");
    }
    return;
  }
  for (Index i = 0; i < theta.size(); ++i) {
    if (theta[i] == 0.0) {
      std::ostringstream msg;
      msg << "multiplicative perturbation cannot move zero entry theta[" << i << "]";
      throw DataError(msg.str());
    }
  }
  require_sign(theta, oracle.sign_domain, oracle.name);
}

Vector sample_mean(const Matrix& rows) {
  Vector total = Vector::Zero(rows.cols());
  for (Index m = 0; m < rows.rows(); ++m) total += rows.row(m).transpose();
  return total / static_cast<double>(rows.rows());
}

Moment expectation_from(const PerturbedSamples& s) { return sample_mean(s.solutions); }

Matrix jacobian_from(const PerturbedSamples& s, const Objective& theta, double epsilon,
                     PerturbationMode mode) {
  const Index d = s.noise.cols();
  const Index samples = s.noise.rows();
  Matrix jac = Matrix::Zero(s.solutions.cols(), d);
  for (Index m = 0; m < samples; ++m) {
    jac.noalias() += s.solutions.row(m).transpose() * s.noise.row(m);
  }
  jac /= epsilon * static_cast<double>(samples);
  if (mode == PerturbationMode::multiplicative) {
    // Column j differentiates with respect to theta_j.
    jac = jac * theta.cwiseInverse().asDiagonal();
  }
  return jac;
}

double fenchel_value_from(const PerturbedSamples& s) {
  double total = 0.0;
  for (Index m = 0; m < s.objectives.rows(); ++m) total += s.objectives.row(m).dot(s.solutions.row(m));
  return total / static_cast<double>(s.objectives.rows());
}

Moment scaled_expectation_from(const PerturbedSamples& s, double epsilon) {
  Vector total = Vector::Zero(s.solutions.cols());
  for (Index m = 0; m < s.noise.rows(); ++m) {
    const Vector factor = multiplicative_factor(s.noise.row(m).transpose(), epsilon);
    total += factor.cwiseProduct(s.solutions.row(m).transpose());
  }
  return total / static_cast<double>(s.noise.rows());
}

Moment perturbed_expectation_additive(const Objective& theta, const PerturbationConfig& cfg,
                                      const CoOracle& oracle) {
  return expectation_from(
      sample_perturbed_solutions(theta, cfg, oracle, PerturbationMode::additive));
}

Matrix perturbed_jacobian_additive(const Objective& theta, const PerturbationConfig& cfg,
                                   const CoOracle& oracle) {
  const auto s = sample_perturbed_solutions(theta, cfg, oracle, PerturbationMode::additive);
  return jacobian_from(s, theta, cfg.epsilon, PerturbationMode::additive);
}

double perturbed_fenchel_value_additive(const Objective& theta, const PerturbationConfig& cfg,
                                        const CoOracle& oracle) {
  return fenchel_value_from(
      sample_perturbed_solutions(theta, cfg, oracle, PerturbationMode::additive));
}

Moment perturbed_expectation_multiplicative(const Objective& theta, const PerturbationConfig& cfg,
                                            const CoOracle& oracle) {
  return expectation_from(
      sample_perturbed_solutions(theta, cfg, oracle, PerturbationMode::multiplicative));
}

Matrix perturbed_jacobian_multiplicative(const Objective& theta, const PerturbationConfig& cfg,
                                         const CoOracle& oracle) {
  const auto s = sample_perturbed_solutions(theta, cfg, oracle, PerturbationMode::multiplicative);
  return jacobian_from(s, theta, cfg.epsilon, PerturbationMode::multiplicative);
}

Moment perturbed_expectation_multiplicative_scaled(const Objective& theta,
                                                   const PerturbationConfig& cfg,
                                                   const CoOracle& oracle) {
  const auto s = sample_perturbed_solutions(theta, cfg, oracle, PerturbationMode::multiplicative);
  return scaled_expectation_from(s, cfg.epsilon);
}

double perturbed_fenchel_value_multiplicative(const Objective& theta, const PerturbationConfig& cfg,
                                              const CoOracle& oracle) {
  return fenchel_value_from(
      sample_perturbed_solutions(theta, cfg, oracle, PerturbationMode::multiplicative));
}

double inexact_jacobian_bound(double epsilon, Index d, double sup_gap,
                              std::optional<double> theta_min_abs) {
  if (!(epsilon > 0.0)) throw ConfigError("inexact_jacobian_bound: epsilon must be > 0");
  if (d < 1) throw DimensionError("inexact_jacobian_bound: d must be >= 1");
  if (sup_gap < 0.0) throw ConfigError("inexact_jacobian_bound: sup_gap must be >= 0");
  double scale = epsilon;
  if (theta_min_abs) {
    if (!(*theta_min_abs > 0.0)) throw ConfigError("inexact_jacobian_bound: theta_min_abs must be > 0");
    scale *= *theta_min_abs;
  }
  return std::sqrt(static_cast<double>(d)) / scale * sup_gap;
}

}  // namespace colayers
