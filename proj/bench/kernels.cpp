// Monte-Carlo sample loop, serial reference vs the OpenMP kernel.
//
//   ./colayers_bench --benchmark_filter=Grid

#include <benchmark/benchmark.h>

#include <omp.h>

#include "colayers/oracles.hpp"
#include "colayers/perturbation.hpp"

using namespace colayers;

namespace {

PerturbationConfig config(int m) {
  PerturbationConfig c;
  c.epsilon = 0.1;
  c.nb_samples = m;
  c.seed = 1;
  return c;
}

Vector grid_costs(Index k) {
  Vector th(k * k);
  for (Index i = 0; i < th.size(); ++i) th[i] = -1.0 - static_cast<double>((i * 37) % 11) / 10.0;
  return th;
}

void GridSerial(benchmark::State& state) {
  const Index k = state.range(0);
  const CoOracle o = make_grid_dijkstra_oracle(GridGraph{k, k, Connectivity::eight});
  const Vector th = grid_costs(k);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        reference::sample_perturbed_solutions_serial(th, config(64), o, PerturbationMode::multiplicative));
  }
}

void GridParallel(benchmark::State& state) {
  const Index k = state.range(0);
  omp_set_num_threads(static_cast<int>(state.range(1)));
  const CoOracle o = make_grid_dijkstra_oracle(GridGraph{k, k, Connectivity::eight});
  const Vector th = grid_costs(k);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_perturbed_solutions(th, config(64), o, PerturbationMode::multiplicative));
  }
}

void RankingSerial(benchmark::State& state) {
  const Index d = state.range(0);
  const CoOracle o = make_ranking_oracle(d);
  const Vector th = Vector::LinSpaced(d, -1, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        reference::sample_perturbed_solutions_serial(th, config(256), o, PerturbationMode::additive));
  }
}

void RankingParallel(benchmark::State& state) {
  const Index d = state.range(0);
  omp_set_num_threads(static_cast<int>(state.range(1)));
  const CoOracle o = make_ranking_oracle(d);
  const Vector th = Vector::LinSpaced(d, -1, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_perturbed_solutions(th, config(256), o, PerturbationMode::additive));
  }
}

}  // namespace

BENCHMARK(GridSerial)->Arg(12)->Arg(24)->Unit(benchmark::kMillisecond);
BENCHMARK(GridParallel)->ArgsProduct({{12, 24}, {1, 4, 8}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(RankingSerial)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);
BENCHMARK(RankingParallel)->ArgsProduct({{100, 1000}, {1, 4, 8}})->Unit(benchmark::kMicrosecond)->UseRealTime();

BENCHMARK_MAIN();
