#include <benchmark/benchmark.h>

#include "cowattack/analytics.hpp"
#include "cowattack/bounds.hpp"
#include "cowattack/sim.hpp"
#include "cowattack/usd.hpp"

namespace {

using namespace cowattack;

void BM_OptimalUsd(benchmark::State& state) {
  const ProtocolParams params{0.06, 0.155, 10};
  for (auto _ : state) benchmark::DoNotOptimize(optimal_usd(params));
}
BENCHMARK(BM_OptimalUsd);

void BM_GainZero(benchmark::State& state) {
  const ProtocolParams params{0.06, 0.155, static_cast<int>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(gain_zero(params));
}
BENCHMARK(BM_GainZero)->Arg(10)->Arg(40);

void BM_LZero(benchmark::State& state) {
  const ChannelParams channel{2e-8, 0.77, 0.9, 0.2};
  const ProtocolParams params{0.5, 0.1, 10};
  for (auto _ : state) benchmark::DoNotOptimize(l_zero(channel, params));
}
BENCHMARK(BM_LZero);

void BM_MuMax(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(mu_max(1e-3, 0.155, 10));
}
BENCHMARK(BM_MuMax);

void BM_BruteForcePClick(benchmark::State& state) {
  const std::array<double, 3> cond{0.4, 0.4, 0.2};
  for (auto _ : state)
    benchmark::DoNotOptimize(
        brute_force_p_click(static_cast<int>(state.range(0)), cond));
}
BENCHMARK(BM_BruteForcePClick)->Arg(6)->Arg(8);

void BM_Simulation(benchmark::State& state) {
  const ProtocolParams params{0.06, 0.155, 10};
  const SimConfig config{static_cast<std::size_t>(state.range(0)), 1, 1};
  for (auto _ : state) benchmark::DoNotOptimize(run_simulation(params, config));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Simulation)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_SimulationParallel(benchmark::State& state) {
  const ProtocolParams params{0.06, 0.155, 10};
  const SimConfig config{1000000, 1, static_cast<unsigned>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(run_simulation(params, config));
  state.SetItemsProcessed(state.iterations() * 1000000);
}
BENCHMARK(BM_SimulationParallel)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
