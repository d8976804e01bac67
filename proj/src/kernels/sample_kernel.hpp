#pragma once

#include "colayers/perturbation.hpp"
#include "colayers/rng.hpp"

namespace colayers::detail {

// Writes row m of the noise, perturbed objective and solution matrices.
inline void fill_sample(const Objective& theta, const PerturbationConfig& cfg,
                        const CoOracle& oracle, PerturbationMode mode, Index m,
                        PerturbedSamples& out) {
  const Index d = theta.size();
  const bool mirrored = cfg.antithetic && (m % 2 == 1);
  const auto stream_index = static_cast<std::uint64_t>(mirrored ? m - 1 : m);
  GaussianStream stream = GaussianStream::for_sample(cfg.seed, stream_index);
  Vector z(d);
  for (Index j = 0; j < d; ++j) z[j] = mirrored ? -stream.next() : stream.next();

  Vector perturbed = mode == PerturbationMode::additive
                         ? Vector(theta + cfg.epsilon * z)
                         : Vector(theta.cwiseProduct(multiplicative_factor(z, cfg.epsilon)));
  Vertex v = oracle(perturbed);
  require_same_size(v.size(), d, "perturbed oracle output");

  out.noise.row(m) = z.transpose();
  out.objectives.row(m) = perturbed.transpose();
  out.solutions.row(m) = v.transpose();
}

inline PerturbedSamples allocate_samples(const PerturbationConfig& cfg, Index d) {
  return PerturbedSamples{Matrix(cfg.nb_samples, d), Matrix(cfg.nb_samples, d),
                          Matrix(cfg.nb_samples, d)};
}

}  // namespace colayers::detail
