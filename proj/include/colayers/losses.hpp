#pragma once

// Structured losses on the objective theta.
//
// Imitation losses take a target (solution and/or true objective) and return
// a convex value with a Danskin subgradient. Experience losses take a
// black-box cost on vertices and return the smoothed expected cost with a
// Monte-Carlo or implicit gradient.
//
// The perturbed Fenchel-Young losses drop the constant Omega(y_bar) term, so
// their values are only comparable for a fixed target.

#include <functional>
#include <optional>

#include "colayers/core.hpp"
#include "colayers/perturbation.hpp"
#include "colayers/regularized.hpp"

namespace colayers {

struct LossResult {
  double value = 0.0;
  Vector gradient;
  // False when an inner Frank-Wolfe run stopped before its gap tolerance.
  bool converged = true;
};

struct Target {
  std::optional<Vertex> solution;      // y_bar
  std::optional<Objective> objective;  // theta_bar
};

using BlackBoxCost = std::function<double(const Vertex&)>;
using VectorCost = std::function<Vector(const Vertex&)>;

// --- imitation -------------------------------------------------------------

LossResult fy_loss_perturbed_additive(const Objective& theta, const Vertex& target,
                                      const PerturbationConfig& cfg, const CoOracle& oracle);

LossResult fy_loss_perturbed_multiplicative(const Objective& theta, const Vertex& target,
                                            const PerturbationConfig& cfg, const CoOracle& oracle);

LossResult fy_loss_regularized(const Objective& theta, const Vertex& target,
                               const Regularizer& omega, const CoOracle& oracle,
                               const FrankWolfeConfig& fw = {});

// (2 theta - theta_bar)^T f(2 theta - theta_bar) + (theta_bar - 2 theta)^T y_bar.
// y_bar is computed as f(theta_bar) when the target lacks it.
LossResult spo_plus_loss(const Objective& theta, const Target& target, const CoOracle& oracle);

// Number of differing coordinates.
double hamming_distance(const Vertex& a, const Vertex& b);

// Maximizer of base_loss(y, y_bar) + theta^T (y - y_bar) over V.
struct LossAugmentedSolver {
  std::function<Vertex(const Objective& theta, const Vertex& target)> solve;
  std::function<double(const Vertex& y, const Vertex& target)> base_loss;
};

LossResult ssvm_loss(const Objective& theta, const Vertex& target,
                     const LossAugmentedSolver& solver);

// Unit simplex with Hamming base loss; target must be a basis vector.
Vertex ssvm_hamming_simplex_solver(const Objective& theta, const Vertex& target);
LossAugmentedSolver simplex_hamming_solver();

// Any oracle over 0/1 vertices: Hamming(y, y_bar) is linear in y there, so
// the loss-augmented problem is the oracle at theta + 1 - 2 y_bar.
LossAugmentedSolver hamming_solver(const CoOracle& oracle);

// Oracle over permutations of a fixed vector (constant norm): the base loss
// 1/2 ||y - y_bar||^2 is linear in y there, so the loss-augmented problem is
// the oracle at theta - y_bar.
LossAugmentedSolver permutation_distance_solver(const CoOracle& oracle);

// max_y l(y, t) + theta^T (y - y_bar) - (Omega(y) - Omega(y_bar)) with a
// user-supplied maximizer. Omega may be empty (zero regularization).
struct GenericImitationLoss {
  std::function<double(const Vector& y, const Target& target)> base_loss;
  std::optional<Regularizer> omega;
  std::function<Vector(const Objective& theta, const Target& target)> maximizer;
};

LossResult generic_imitation_loss(const Objective& theta, const Target& target,
                                  const GenericImitationLoss& loss);

// --- experience ------------------------------------------------------------

// Value (1/M) sum_m c(f(theta_m)). The gradient subtracts the baseline
// c(f(theta)) when control_variate is set (one extra oracle call).
LossResult expected_regret_additive(const Objective& theta, const BlackBoxCost& cost,
                                    const PerturbationConfig& cfg, const CoOracle& oracle,
                                    bool control_variate = true);

LossResult expected_regret_multiplicative(const Objective& theta, const BlackBoxCost& cost,
                                          const PerturbationConfig& cfg, const CoOracle& oracle,
                                          bool control_variate = true);

// Value sum_i w_i c(v_i) over the Frank-Wolfe atoms, gradient through the
// implicit weight Jacobian.
LossResult expected_regret_regularized(const Objective& theta, const BlackBoxCost& cost,
                                       const Regularizer& omega, const CoOracle& oracle,
                                       const FrankWolfeConfig& fw = {});

// Monte-Carlo Jacobian (k x d) of theta -> E[c(V)] for a vector-valued c.
Matrix pushforward_jacobian(const Objective& theta, const VectorCost& cost,
                            const PerturbationConfig& cfg, const CoOracle& oracle,
                            PerturbationMode mode, bool control_variate = true);

}  // namespace colayers
