#include "colayers/apps/scheduling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "colayers/oracles.hpp"
#include "colayers/rng.hpp"

namespace colayers::apps {

void SchedulingInstance::validate() const {
  require_same_size(release.size(), processing.size(), "scheduling instance");
  if (release.size() == 0) throw DataError("scheduling instance has no jobs");
  for (Index j = 0; j < jobs(); ++j) {
    if (!std::isfinite(release[j]) || release[j] < 0.0) {
      throw DataError("scheduling instance: release dates must be finite and >= 0");
    }
    if (!std::isfinite(processing[j]) || processing[j] <= 0.0) {
      throw DataError("scheduling instance: processing times must be finite and > 0");
    }
  }
  if (optimal && !is_permutation_schedule(*optimal, jobs())) {
    throw DataError("scheduling instance: label is not a permutation");
  }
}

bool is_permutation_schedule(const Schedule& s, Index n) {
  if (static_cast<Index>(s.size()) != n) return false;
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (Index j : s) {
    if (j < 0 || j >= n || seen[static_cast<std::size_t>(j)]) return false;
    seen[static_cast<std::size_t>(j)] = true;
  }
  return true;
}

CompletionTimes completion_times(const Schedule& schedule, const Vector& release,
                                 const Vector& processing) {
  require_same_size(release.size(), processing.size(), "completion_times");
  if (!is_permutation_schedule(schedule, release.size())) {
    throw DataError("completion_times: schedule is not a permutation of the jobs");
  }
  CompletionTimes out;
  out.per_job = Vector::Zero(release.size());
  double clock = 0.0;
  bool first = true;
  for (Index j : schedule) {
    clock = (first ? release[j] : std::max(release[j], clock)) + processing[j];
    first = false;
    out.per_job[j] = clock;
    out.total += clock;
  }
  return out;
}

BruteForceSchedule brute_force_schedule(const Vector& release, const Vector& processing) {
  require_same_size(release.size(), processing.size(), "brute_force_schedule");
  const Index n = release.size();
  if (n > 10) throw ConfigError("brute_force_schedule refuses n > 10");
  if (n == 0) throw DataError("brute_force_schedule: no jobs");
  Schedule s(static_cast<std::size_t>(n));
  std::iota(s.begin(), s.end(), Index{0});
  BruteForceSchedule best{s, completion_times(s, release, processing).total};
  while (std::next_permutation(s.begin(), s.end())) {
    const double total = completion_times(s, release, processing).total;
    if (total < best.total) best = {s, total};
  }
  return best;
}

namespace {

Vector competition_ranks(const Vector& values) {
  Vector ranks(values.size());
  for (Index i = 0; i < values.size(); ++i) {
    double smaller = 0.0;
    for (Index j = 0; j < values.size(); ++j) smaller += values[j] < values[i] ? 1.0 : 0.0;
    ranks[i] = 1.0 + smaller;
  }
  return ranks;
}

}  // namespace

Matrix scheduling_features(const SchedulingInstance& instance) {
  instance.validate();
  const Vector& r = instance.release;
  const Vector& p = instance.processing;
  const double r_max = r.maxCoeff();
  const double p_max = p.maxCoeff();
  Matrix x(instance.jobs(), kSchedulingFeatureCount);
  x.col(0) = r;
  x.col(1) = p;
  x.col(2) = r + p;
  x.col(3) = competition_ranks(r);
  x.col(4) = competition_ranks(p);
  x.col(5) = r_max > 0.0 ? Vector(r / r_max) : Vector(Vector::Zero(r.size()));
  x.col(6) = p / p_max;
  x.col(7).setOnes();
  return x;
}

Schedule schedule_from_scores(const Objective& theta) {
  Schedule s(static_cast<std::size_t>(theta.size()));
  std::iota(s.begin(), s.end(), Index{0});
  std::stable_sort(s.begin(), s.end(), [&](Index a, Index b) { return theta[a] < theta[b]; });
  return s;
}

Vertex schedule_to_ranking(const Schedule& schedule) {
  const auto n = static_cast<Index>(schedule.size());
  if (!is_permutation_schedule(schedule, n)) throw DataError("schedule_to_ranking: not a permutation");
  Vertex v(n);
  for (Index k = 0; k < n; ++k) v[schedule[static_cast<std::size_t>(k)]] = static_cast<double>(k + 1);
  return v;
}

Schedule pmlh_predict(const GlmModel& model, const SchedulingInstance& instance) {
  return schedule_from_scores(glm_forward(model, scheduling_features(instance)));
}

double scheduling_gap(const Schedule& predicted, const SchedulingInstance& instance,
                      double reference_total) {
  if (!(reference_total > 0.0)) throw DataError("scheduling_gap: reference total must be > 0");
  const double total = completion_times(predicted, instance.release, instance.processing).total;
  return (total - reference_total) / reference_total * 100.0;
}

Schedule release_date_schedule(const SchedulingInstance& instance) {
  Schedule s(static_cast<std::size_t>(instance.jobs()));
  std::iota(s.begin(), s.end(), Index{0});
  std::stable_sort(s.begin(), s.end(), [&](Index a, Index b) {
    if (instance.release[a] != instance.release[b]) return instance.release[a] < instance.release[b];
    return instance.processing[a] < instance.processing[b];
  });
  return s;
}

Schedule random_schedule(Index n, std::uint64_t seed) {
  Schedule s(static_cast<std::size_t>(n));
  std::iota(s.begin(), s.end(), Index{0});
  SplitMix64 rng(seed);
  for (std::size_t i = s.size(); i > 1; --i) {
    std::swap(s[i - 1], s[static_cast<std::size_t>(rng() % i)]);
  }
  return s;
}

std::vector<SchedulingInstance> generate_scheduling_instances(const SchedulingGeneratorConfig& cfg) {
  if (cfg.min_jobs < 1 || cfg.max_jobs < cfg.min_jobs) {
    throw ConfigError("scheduling generator: need 1 <= min_jobs <= max_jobs");
  }
  if (cfg.count < 0) throw ConfigError("scheduling generator: count must be >= 0");
  std::vector<SchedulingInstance> out;
  out.reserve(static_cast<std::size_t>(cfg.count));
  for (int i = 0; i < cfg.count; ++i) {
    SplitMix64 rng(splitmix64_mix(cfg.seed ^ splitmix64_mix(static_cast<std::uint64_t>(i) + 1)));
    const Index n = uniform_int(rng, cfg.min_jobs, cfg.max_jobs);
    SchedulingInstance inst;
    inst.processing.resize(n);
    inst.release.resize(n);
    for (Index j = 0; j < n; ++j) inst.processing[j] = static_cast<double>(uniform_int(rng, 1, 100));
    const auto horizon = static_cast<std::int64_t>(std::floor(0.5 * inst.processing.sum()));
    for (Index j = 0; j < n; ++j) inst.release[j] = static_cast<double>(uniform_int(rng, 0, horizon));
    out.push_back(std::move(inst));
  }
  if (!cfg.label) return out;
  const auto count = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    SchedulingInstance& inst = out[static_cast<std::size_t>(i)];
    if (inst.jobs() > 10) continue;
    const BruteForceSchedule best = brute_force_schedule(inst.release, inst.processing);
    inst.optimal = best.schedule;
    inst.optimal_total = best.total;
  }
  return out;
}

std::vector<Sample> scheduling_samples(const std::vector<SchedulingInstance>& instances) {
  std::vector<Sample> out;
  out.reserve(instances.size());
  for (const SchedulingInstance& inst : instances) {
    if (!inst.optimal) throw DataError("scheduling_samples: instance is unlabeled");
    Sample s;
    s.features = scheduling_features(inst);
    s.oracle = make_ranking_oracle(inst.jobs());
    s.target_solution = schedule_to_ranking(*inst.optimal);
    s.ssvm_solver = permutation_distance_solver(s.oracle);
    s.cost = [inst](const Vertex& ranking) {
      Schedule order(static_cast<std::size_t>(ranking.size()));
      for (Index j = 0; j < ranking.size(); ++j) {
        order[static_cast<std::size_t>(std::lround(ranking[j])) - 1] = j;
      }
      return completion_times(order, inst.release, inst.processing).total;
    };
    s.gap = [inst](const Objective& theta) {
      return scheduling_gap(schedule_from_scores(theta), inst, inst.optimal_total);
    };
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace colayers::apps
