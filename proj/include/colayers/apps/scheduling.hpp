#pragma once

// Single machine scheduling with release dates, total completion time
// objective (1|r_j|sum C_j), decoded from the ranking layer.
//
// Schedules are 0-based job orders: schedule[k] is the job run k-th. The job
// with the smallest predicted score runs first, so the ranking vertex of a
// schedule holds 1-based positions.

#include <cstdint>
#include <optional>
#include <vector>

#include "colayers/core.hpp"
#include "colayers/learn.hpp"

namespace colayers::apps {

using Schedule = std::vector<Index>;

struct SchedulingInstance {
  Vector release;     // r_j >= 0
  Vector processing;  // p_j > 0
  std::optional<Schedule> optimal;
  double optimal_total = 0.0;

  Index jobs() const { return release.size(); }
  void validate() const;
};

struct CompletionTimes {
  Vector per_job;  // indexed by job
  double total = 0.0;
};

bool is_permutation_schedule(const Schedule& s, Index n);

CompletionTimes completion_times(const Schedule& schedule, const Vector& release,
                                 const Vector& processing);

struct BruteForceSchedule {
  Schedule schedule;
  double total = 0.0;
};

// Exhaustive search, n <= 10; the lexicographically first optimal order wins.
BruteForceSchedule brute_force_schedule(const Vector& release, const Vector& processing);

constexpr Index kSchedulingFeatureCount = 8;

// Per job: r, p, r + p, rank of r, rank of p, r / max r, p / max p, 1.
// Ranks are 1 + the number of strictly smaller values, so equal values share
// a rank and distinct values form a permutation of 1..n.
Matrix scheduling_features(const SchedulingInstance& instance);

// Jobs in increasing theta order, ties by job index.
Schedule schedule_from_scores(const Objective& theta);

// Ranking vertex (1-based positions) of a schedule, the imitation target.
Vertex schedule_to_ranking(const Schedule& schedule);

Schedule pmlh_predict(const GlmModel& model, const SchedulingInstance& instance);

// Percent excess of the schedule's total over `reference_total`.
double scheduling_gap(const Schedule& predicted, const SchedulingInstance& instance,
                      double reference_total);

// Jobs by release date, ties by processing time then index.
Schedule release_date_schedule(const SchedulingInstance& instance);
Schedule random_schedule(Index n, std::uint64_t seed);

struct SchedulingGeneratorConfig {
  int count = 10;
  Index min_jobs = 8;
  Index max_jobs = 8;
  std::uint64_t seed = 0;
  bool label = true;  // brute force when n <= 10
};

// p_j ~ U{1..100}, r_j ~ U{0..floor(0.5 sum p)}.
std::vector<SchedulingInstance> generate_scheduling_instances(const SchedulingGeneratorConfig& cfg);

// Samples for the ranking layer; requires labeled instances.
std::vector<Sample> scheduling_samples(const std::vector<SchedulingInstance>& instances);

}  // namespace colayers::apps
