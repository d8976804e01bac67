#pragma once

// Small deterministic random number helpers.
//
// Gaussian noise for the perturbed layers comes from counter-based streams:
// the draws of sample m are a function of (seed, m) only, so changing the
// sample count or the thread count never moves an existing sample.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace colayers {

constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// SplitMix64 engine, usable as a UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t state) : state_(state) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return splitmix64_mix(state_);
  }

 private:
  std::uint64_t state_;
};

// Uniform double in (0, 1); never returns 0 so log() stays finite.
template <class Engine>
double uniform_open01(Engine& engine) {
  return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53;
}

// Uniform double in [0, 1).
template <class Engine>
double uniform01(Engine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

// Uniform integer in [lo, hi].
template <class Engine>
std::int64_t uniform_int(Engine& engine, std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(engine() % span);
}

// Stream of standard normal draws by the Box-Muller transform.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t key) : engine_(key) {}

  // Stream keyed by (seed, index): sample m of a noise matrix.
  static GaussianStream for_sample(std::uint64_t seed, std::uint64_t index) {
    return GaussianStream(splitmix64_mix(splitmix64_mix(seed) ^ (index * 0xd1b54a32d192ed03ULL)));
  }

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open01(engine_);
    const double u2 = uniform01(engine_);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  SplitMix64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace colayers
