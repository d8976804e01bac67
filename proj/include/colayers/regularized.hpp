#pragma once

// Explicitly regularized layers
//
//   mu_hat(theta) = argmax_{mu in conv(V)} theta^T mu - Omega(mu)
//
// computed by Frank-Wolfe with nothing but the linear oracle. The iterate is
// carried as a convex combination of visited vertices, which doubles as a
// sparse distribution over V. Jacobians come from implicit differentiation
// of the optimality conditions of the weights restricted to those atoms.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "colayers/core.hpp"

namespace colayers {

struct Regularizer {
  std::string name;
  std::function<double(const Moment&)> value;
  std::function<Vector(const Moment&)> gradient;
  // Optional; when empty the Hessian is taken by central differences of
  // `gradient`.
  std::function<Matrix(const Moment&)> hessian;
  // Omega(mu) = 0.5 ||mu||^2, which admits an exact line search.
  bool half_squared_norm = false;
};

Regularizer half_squared_norm();

// sum_i mu_i log mu_i. Its domain is the nonnegative orthant, so use it on
// the simplex (where the layer is softmax) and start Frank-Wolfe from an
// interior point, e.g. simplex_uniform_start.
Regularizer shannon_negentropy();

enum class StepRule {
  automatic,           // analytic for half_squared_norm, line search otherwise
  analytic_quadratic,  // exact step for 0.5 ||mu||^2
  open_loop,           // 2 / (t + 2)
  line_search          // bisection on the directional derivative
};

enum class FrankWolfeVariant { away_step, vanilla };

struct FrankWolfeConfig {
  int max_iterations = 5000;
  double dual_gap_tolerance = 1e-8;
  StepRule step_rule = StepRule::automatic;
  FrankWolfeVariant variant = FrankWolfeVariant::away_step;
  // Starting distribution; defaults to the vertex f(theta).
  std::optional<SparseDistribution> initial;
  // Atoms whose weight falls below this are dropped from the output.
  double prune_weight = 1e-12;

  void validate() const;
};

struct FrankWolfeResult {
  Moment moment;
  SparseDistribution distribution;
  double dual_gap = 0.0;
  int iterations = 0;
  bool converged = false;
  // theta^T mu_t - Omega(mu_t) after each iteration, starting with mu_0.
  std::vector<double> objective_trace;
};

SparseDistribution simplex_uniform_start(Index d);

FrankWolfeResult frank_wolfe_layer(const Objective& theta, const Regularizer& omega,
                                   const CoOracle& oracle, const FrankWolfeConfig& cfg = {});

// Euclidean projection of theta onto conv(V).
FrankWolfeResult sparsemap(const Objective& theta, const CoOracle& oracle,
                           const FrankWolfeConfig& cfg = {});

struct RegularizedJacobian {
  Matrix jacobian;         // d x d, d mu_hat / d theta
  // k x d, d w_i / d theta; the minimum-norm solution when the atoms are
  // affinely dependent, empty after a fallback
  Matrix weight_jacobian;
  FrankWolfeResult layer;
  // False when the restricted KKT system had no solution and the Jacobian
  // came from finite differences instead.
  bool implicit = true;
  double condition_number = 0.0;
};

RegularizedJacobian regularized_jacobian(const Objective& theta, const Regularizer& omega,
                                         const CoOracle& oracle, const FrankWolfeConfig& cfg = {});

// Central-difference Jacobian of the layer output; also the fallback above.
Matrix finite_difference_layer_jacobian(const Objective& theta, const Regularizer& omega,
                                        const CoOracle& oracle, const FrankWolfeConfig& cfg,
                                        double step = 1e-5);

}  // namespace colayers
