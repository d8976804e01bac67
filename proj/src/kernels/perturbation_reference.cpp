#include "sample_kernel.hpp"

namespace colayers::reference {

PerturbedSamples sample_perturbed_solutions_serial(const Objective& theta,
                                                   const PerturbationConfig& cfg,
                                                   const CoOracle& oracle, PerturbationMode mode) {
  cfg.validate();
  validate_perturbation_input(theta, oracle, mode);
  PerturbedSamples out = detail::allocate_samples(cfg, theta.size());
  for (Index m = 0; m < cfg.nb_samples; ++m) detail::fill_sample(theta, cfg, oracle, mode, m, out);
  return out;
}

}  // namespace colayers::reference
