#include <benchmark/benchmark.h>

#include "pintmf/factorization.hpp"
#include "pintmf/simulate.hpp"

using namespace pintmf;

static void BM_FitBenchmark(benchmark::State& state, const char* name) {
  const auto spec = simulate::benchmark(name, 1);
  const auto sim = simulate::generate(spec);
  const int P = static_cast<int>(spec.group_sizes.size());
  for (auto _ : state) benchmark::DoNotOptimize(fit(sim.data, P, PenaltyConfig::automatic(5, 1)));
  state.SetLabel(std::to_string(sim.data.samples()) + " samples");
}
BENCHMARK_CAPTURE(BM_FitBenchmark, B1, "B1")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_FitBenchmark, B8, "B8")->Unit(benchmark::kMillisecond);

static void BM_FitFixed(benchmark::State& state) {
  const auto sim = simulate::generate(simulate::benchmark("B1", 1));
  const auto pen = PenaltyConfig::fixed_uniform(3, sim.data.samples(), 0.05, 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(fit(sim.data, 4, pen));
}
BENCHMARK(BM_FitFixed)->Unit(benchmark::kMillisecond);
