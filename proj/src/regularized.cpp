#include "colayers/regularized.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace colayers {

Regularizer half_squared_norm() {
  Regularizer r;
  r.name = "half_squared_norm";
  r.value = [](const Moment& mu) { return 0.5 * mu.squaredNorm(); };
  r.gradient = [](const Moment& mu) { return Vector(mu); };
  r.hessian = [](const Moment& mu) { return Matrix(Matrix::Identity(mu.size(), mu.size())); };
  r.half_squared_norm = true;
  return r;
}

Regularizer shannon_negentropy() {
  Regularizer r;
  r.name = "shannon_negentropy";
  r.value = [](const Moment& mu) {
    double total = 0.0;
    for (Index i = 0; i < mu.size(); ++i) {
      if (mu[i] > 0.0) total += mu[i] * std::log(mu[i]);
    }
    return total;
  };
  r.gradient = [](const Moment& mu) {
    Vector g(mu.size());
    for (Index i = 0; i < mu.size(); ++i) {
      g[i] = mu[i] > 0.0 ? std::log(mu[i]) + 1.0 : -std::numeric_limits<double>::infinity();
    }
    return g;
  };
  r.hessian = [](const Moment& mu) { return Matrix(mu.cwiseInverse().asDiagonal()); };
  return r;
}

void FrankWolfeConfig::validate() const {
  if (max_iterations < 1) throw ConfigError("FrankWolfeConfig: max_iterations must be >= 1");
  if (!(dual_gap_tolerance > 0.0)) throw ConfigError("FrankWolfeConfig: tolerance must be > 0");
  if (initial && initial->empty()) {
    throw ConfigError("FrankWolfeConfig: empty initial distribution");
  }
}

SparseDistribution simplex_uniform_start(Index d) {
  std::vector<Atom> atoms;
  for (Index i = 0; i < d; ++i) atoms.push_back({Vertex::Unit(d, i), 1.0 / static_cast<double>(d)});
  return SparseDistribution(std::move(atoms));
}

namespace {

Vector checked_gradient(const Regularizer& omega, const Moment& mu) {
  Vector g = omega.gradient(mu);
  require_same_size(g.size(), mu.size(), "regularizer gradient");
  for (Index i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g[i])) {
      throw NumericalError("Frank-Wolfe: non-finite gradient of " + omega.name +
                           " (start from an interior point for barrier-like regularizers)");
    }
  }
  return g;
}

Moment combine(const std::vector<Atom>& atoms, Index d) {
  Moment mu = Moment::Zero(d);
  for (const Atom& a : atoms) mu += a.weight * a.vertex;
  return mu;
}

// Largest gamma in [0, gamma_max] where the concave objective along `dir`
// still increases.
double bisection_step(const Objective& theta, const Regularizer& omega, const Moment& mu,
                      const Vector& dir, double gamma_max) {
  auto slope = [&](double gamma) {
    const Vector g = omega.gradient(mu + gamma * dir);
    const double s = (theta - g).dot(dir);
    return std::isnan(s) ? -std::numeric_limits<double>::infinity() : s;
  };
  if (slope(gamma_max) >= 0.0) return gamma_max;
  double lo = 0.0;
  double hi = gamma_max;
  for (int it = 0; it < 80 && hi - lo > 1e-16; ++it) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) > 0.0 ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

FrankWolfeResult frank_wolfe_layer(const Objective& theta, const Regularizer& omega,
                                   const CoOracle& oracle, const FrankWolfeConfig& cfg) {
  cfg.validate();
  require_finite(theta, "frank_wolfe_layer");
  const Index d = theta.size();

  std::vector<Atom> atoms;
  if (cfg.initial) {
    atoms = cfg.initial->atoms();
    for (const Atom& a : atoms) require_same_size(a.vertex.size(), d, "Frank-Wolfe initial atom");
  } else {
    atoms.push_back({oracle(theta), 1.0});
  }

  StepRule rule = cfg.step_rule;
  if (rule == StepRule::automatic) {
    rule = omega.half_squared_norm ? StepRule::analytic_quadratic : StepRule::line_search;
  }
  if (rule == StepRule::analytic_quadratic && !omega.half_squared_norm) {
    throw ConfigError("analytic line search requires the half squared norm regularizer");
  }

  FrankWolfeResult result;
  Moment mu = combine(atoms, d);
  result.objective_trace.push_back(theta.dot(mu) - omega.value(mu));

  int t = 0;
  double gap = std::numeric_limits<double>::infinity();
  for (;; ++t) {
    const Vector direction_obj = theta - checked_gradient(omega, mu);
    const Vertex s = oracle(direction_obj);
    gap = direction_obj.dot(s - mu);
    if (gap <= cfg.dual_gap_tolerance) {
      result.converged = true;
      break;
    }
    if (t >= cfg.max_iterations) break;

    // Away vertex: worst active atom for the current linearization.
    std::size_t away = 0;
    double away_gap = -std::numeric_limits<double>::infinity();
    if (cfg.variant == FrankWolfeVariant::away_step) {
      double worst = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        const double score = direction_obj.dot(atoms[i].vertex);
        if (score < worst) {
          worst = score;
          away = i;
        }
      }
      away_gap = direction_obj.dot(mu) - worst;
    }

    const bool forward = cfg.variant == FrankWolfeVariant::vanilla || gap >= away_gap ||
                         atoms[away].weight >= 1.0;
    Vector dir;
    double gamma_max = 1.0;
    if (forward) {
      dir = s - mu;
    } else {
      dir = mu - atoms[away].vertex;
      gamma_max = atoms[away].weight / (1.0 - atoms[away].weight);
    }

    double gamma = 0.0;
    switch (rule) {
      case StepRule::analytic_quadratic: {
        const double curvature = dir.squaredNorm();
        gamma = curvature > 0.0 ? direction_obj.dot(dir) / curvature : 0.0;
        gamma = std::clamp(gamma, 0.0, gamma_max);
        break;
      }
      case StepRule::open_loop:
        gamma = std::min(gamma_max, 2.0 / (t + 2.0));
        break;
      case StepRule::line_search:
      case StepRule::automatic:
        gamma = bisection_step(theta, omega, mu, dir, gamma_max);
        break;
    }

    if (forward) {
      for (Atom& a : atoms) a.weight *= 1.0 - gamma;
      auto it = std::find_if(atoms.begin(), atoms.end(), [&](const Atom& a) { return a.vertex == s; });
      if (it == atoms.end()) {
        atoms.push_back({s, gamma});
      } else {
        it->weight += gamma;
      }
    } else {
      for (Atom& a : atoms) a.weight *= 1.0 + gamma;
      atoms[away].weight -= gamma;
      if (gamma >= gamma_max) atoms[away].weight = 0.0;
    }
    std::erase_if(atoms, [](const Atom& a) { return a.weight <= 0.0; });
    mu = combine(atoms, d);
    result.objective_trace.push_back(theta.dot(mu) - omega.value(mu));
  }

  // Drop negligible atoms and renormalize; the moment is rebuilt from the
  // atoms so the decomposition stays exact.
  std::erase_if(atoms, [&](const Atom& a) { return a.weight < cfg.prune_weight; });
  double total = 0.0;
  for (const Atom& a : atoms) total += a.weight;
  for (Atom& a : atoms) a.weight /= total;

  result.distribution = SparseDistribution(std::move(atoms));
  result.moment = result.distribution.mean();
  result.dual_gap = gap;
  result.iterations = t;
  return result;
}

FrankWolfeResult sparsemap(const Objective& theta, const CoOracle& oracle,
                           const FrankWolfeConfig& cfg) {
  return frank_wolfe_layer(theta, half_squared_norm(), oracle, cfg);
}

namespace {

Matrix hessian_at(const Regularizer& omega, const Moment& mu) {
  if (omega.hessian) return omega.hessian(mu);
  const Index d = mu.size();
  const double h = 1e-6;
  Matrix hess(d, d);
  for (Index j = 0; j < d; ++j) {
    Moment up = mu;
    Moment down = mu;
    up[j] += h;
    down[j] -= h;
    hess.col(j) = (omega.gradient(up) - omega.gradient(down)) / (2.0 * h);
  }
  return 0.5 * (hess + hess.transpose());
}

}  // namespace

Matrix finite_difference_layer_jacobian(const Objective& theta, const Regularizer& omega,
                                        const CoOracle& oracle, const FrankWolfeConfig& cfg,
                                        double step) {
  const Index d = theta.size();
  Matrix jac(d, d);
  for (Index j = 0; j < d; ++j) {
    Objective up = theta;
    Objective down = theta;
    up[j] += step;
    down[j] -= step;
    jac.col(j) = (frank_wolfe_layer(up, omega, oracle, cfg).moment -
                  frank_wolfe_layer(down, omega, oracle, cfg).moment) /
                 (2.0 * step);
  }
  return jac;
}

RegularizedJacobian regularized_jacobian(const Objective& theta, const Regularizer& omega,
                                         const CoOracle& oracle, const FrankWolfeConfig& cfg) {
  RegularizedJacobian out;
  out.layer = frank_wolfe_layer(theta, omega, oracle, cfg);
  const auto& atoms = out.layer.distribution.atoms();
  const Index d = theta.size();
  const auto k = static_cast<Index>(atoms.size());

  Matrix verts(d, k);
  for (Index i = 0; i < k; ++i) verts.col(i) = atoms[static_cast<std::size_t>(i)].vertex;

  // Stationarity of max_p theta^T V p - Omega(V p) s.t. 1^T p = 1 on the
  // active atoms:
  //   [V^T H V  1] [dp     ]   [V^T]
  //   [1^T      0] [dlambda] = [0  ] dtheta
  const Matrix hess = hessian_at(omega, out.layer.moment);
  Matrix kkt = Matrix::Zero(k + 1, k + 1);
  kkt.topLeftCorner(k, k) = verts.transpose() * hess * verts;
  kkt.block(0, k, k, 1).setOnes();
  kkt.block(k, 0, 1, k).setOnes();
  Matrix rhs = Matrix::Zero(k + 1, d);
  rhs.topRows(k) = verts.transpose();

  Eigen::JacobiSVD<Matrix> svd(kkt);
  const auto& sv = svd.singularValues();
  const double smallest = sv(sv.size() - 1);
  out.condition_number = smallest > 0.0 ? sv(0) / smallest : std::numeric_limits<double>::infinity();

  Matrix solution;
  if (std::isfinite(out.condition_number) && out.condition_number <= 1e12) {
    solution = kkt.fullPivLu().solve(rhs);
  } else {
    // Affinely dependent atoms leave the weights underdetermined but not the
    // moment: every solution of a consistent system gives the same V dp.
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(kkt);
    cod.setThreshold(1e-10);
    solution = cod.solve(rhs);
    if ((kkt * solution - rhs).norm() > 1e-8 * (1.0 + rhs.norm())) {
      out.implicit = false;
      out.jacobian = finite_difference_layer_jacobian(theta, omega, oracle, cfg);
      return out;
    }
  }
  out.weight_jacobian = solution.topRows(k);
  out.jacobian = verts * out.weight_jacobian;
  return out;
}

}  // namespace colayers
