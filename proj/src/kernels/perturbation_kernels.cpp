#include <exception>

#include <omp.h>

#include "sample_kernel.hpp"

namespace colayers {

PerturbedSamples sample_perturbed_solutions(const Objective& theta, const PerturbationConfig& cfg,
                                            const CoOracle& oracle, PerturbationMode mode,
                                            Execution exec) {
  if (exec == Execution::serial || cfg.nb_samples < 2 || omp_get_max_threads() == 1 ||
      omp_in_parallel()) {
    return reference::sample_perturbed_solutions_serial(theta, cfg, oracle, mode);
  }
  cfg.validate();
  validate_perturbation_input(theta, oracle, mode);
  PerturbedSamples out = detail::allocate_samples(cfg, theta.size());

  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 4)
  for (Index m = 0; m < cfg.nb_samples; ++m) {
    try {
      detail::fill_sample(theta, cfg, oracle, mode, m, out);
    } catch (...) {
#pragma omp critical(colayers_sample_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace colayers
