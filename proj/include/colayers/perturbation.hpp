#pragma once

// Monte-Carlo probabilistic layers built by Gaussian perturbation of the
// objective.
//
// Additive:        theta_m = theta + eps * Z_m
// Multiplicative:  theta_m = theta .* exp(eps * Z_m - eps^2 / 2)
//
// Every estimator below draws the same Z_1..Z_M for the same config, so the
// expectation, Jacobian, Fenchel value and the losses built on them share
// their samples. Sample m depends on (seed, m) only.

#include <cstdint>
#include <optional>

#include "colayers/core.hpp"

namespace colayers {

struct PerturbationConfig {
  double epsilon = 1.0;
  int nb_samples = 1;
  std::uint64_t seed = 0;
  // Pair sample 2k+1 with the negated noise of sample 2k.
  bool antithetic = false;

  void validate() const;
};

enum class PerturbationMode { additive, multiplicative };

const char* to_string(PerturbationMode mode);

// How the M oracle calls are scheduled. Both produce identical bits.
enum class Execution { serial, parallel };

// M x d matrix of standard normal draws; row m is sample m.
Matrix noise_matrix(const PerturbationConfig& cfg, Index d);

// exp(eps * z - eps^2 / 2) componentwise.
Vector multiplicative_factor(const Vector& z, double epsilon);

// Everything one pass of M oracle calls produces.
struct PerturbedSamples {
  Matrix noise;       // M x d
  Matrix objectives;  // M x d, perturbed theta_m
  Matrix solutions;   // M x d, f(theta_m)
};

// Checks theta against the mode and the oracle sign domain.
void validate_perturbation_input(const Objective& theta, const CoOracle& oracle,
                                 PerturbationMode mode);

// Runs the M perturbed oracle calls. The parallel path distributes samples
// over OpenMP threads; row m of the result never depends on the schedule.
PerturbedSamples sample_perturbed_solutions(const Objective& theta, const PerturbationConfig& cfg,
                                            const CoOracle& oracle, PerturbationMode mode,
                                            Execution exec = Execution::parallel);

namespace reference {
// Plain loop over samples. Kept as the ground truth for the parallel kernel.
PerturbedSamples sample_perturbed_solutions_serial(const Objective& theta,
                                                   const PerturbationConfig& cfg,
                                                   const CoOracle& oracle, PerturbationMode mode);
}  // namespace reference

// Fixed-order column mean of an M x d matrix.
Vector sample_mean(const Matrix& rows);

// (1/M) sum_m f(theta + eps Z_m)
Moment perturbed_expectation_additive(const Objective& theta, const PerturbationConfig& cfg,
                                      const CoOracle& oracle);
// (1/(eps M)) sum_m f(theta + eps Z_m) Z_m^T
Matrix perturbed_jacobian_additive(const Objective& theta, const PerturbationConfig& cfg,
                                   const CoOracle& oracle);
// (1/M) sum_m max_v (theta + eps Z_m)^T v
double perturbed_fenchel_value_additive(const Objective& theta, const PerturbationConfig& cfg,
                                        const CoOracle& oracle);

// (1/M) sum_m f(theta .* exp(eps Z_m - eps^2/2)); theta must have no zero entry.
Moment perturbed_expectation_multiplicative(const Objective& theta, const PerturbationConfig& cfg,
                                            const CoOracle& oracle);
// J[i][j] = (1/(eps theta_j)) (1/M) sum_m f_i(theta_m) Z_mj
Matrix perturbed_jacobian_multiplicative(const Objective& theta, const PerturbationConfig& cfg,
                                         const CoOracle& oracle);
// (1/M) sum_m exp(eps Z_m - eps^2/2) .* f(theta_m), gradient of the
// multiplicative Fenchel value below.
Moment perturbed_expectation_multiplicative_scaled(const Objective& theta,
                                                   const PerturbationConfig& cfg,
                                                   const CoOracle& oracle);
// (1/M) sum_m theta_m^T f(theta_m)
double perturbed_fenchel_value_multiplicative(const Objective& theta, const PerturbationConfig& cfg,
                                              const CoOracle& oracle);

// Reductions shared by the estimators, usable on samples computed once.
Moment expectation_from(const PerturbedSamples& s);
Matrix jacobian_from(const PerturbedSamples& s, const Objective& theta, double epsilon,
                     PerturbationMode mode);
double fenchel_value_from(const PerturbedSamples& s);
Moment scaled_expectation_from(const PerturbedSamples& s, double epsilon);

// Upper bound on the spectral-norm error of a perturbed Jacobian when an
// inexact oracle g replaces f with sup_theta ||g(theta) - f(theta)|| <= sup_gap:
//   additive        sqrt(d) / eps * sup_gap
//   multiplicative  sqrt(d) / (eps * min_i |theta_i|) * sup_gap
double inexact_jacobian_bound(double epsilon, Index d, double sup_gap,
                              std::optional<double> theta_min_abs = std::nullopt);

}  // namespace colayers
