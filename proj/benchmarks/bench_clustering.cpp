#include <benchmark/benchmark.h>

#include <random>

#include "pintmf/clustering.hpp"

using namespace pintmf;

static void BM_WardPartition(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  const Eigen::MatrixXd X = Eigen::MatrixXd::NullaryExpr(state.range(0), 4, [&] { return nd(rng); });
  for (auto _ : state) benchmark::DoNotOptimize(clustering::ward_partition(X, 4));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_WardPartition)->RangeMultiplier(2)->Range(32, 512)->Complexity();
