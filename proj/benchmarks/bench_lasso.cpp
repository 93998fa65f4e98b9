#include <benchmark/benchmark.h>

#include <random>

#include "pintmf/lasso.hpp"

using namespace pintmf;

namespace {

lasso::LassoProblem make_problem(int m, int q, bool nonneg) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  lasso::LassoProblem p;
  p.design = Eigen::MatrixXd::NullaryExpr(m, q, [&] { return nd(rng); });
  p.response = p.design.leftCols(std::min(q, 3)).rowwise().sum() + Eigen::VectorXd::NullaryExpr(m, [&] { return nd(rng); });
  p.nonneg = nonneg;
  return p;
}

void BM_SolveLasso(benchmark::State& state) {
  const auto p = make_problem(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), false);
  const double lambda = 0.1 * lasso::lambda_path(p, 2, 0.5)[0];
  for (auto _ : state) benchmark::DoNotOptimize(lasso::solve_lasso(p, lambda));
}
BENCHMARK(BM_SolveLasso)->Args({60, 4})->Args({60, 20})->Args({200, 100});

void BM_CrossValidation(benchmark::State& state) {
  const auto p = make_problem(static_cast<int>(state.range(0)), 4, true);
  lasso::CvOptions opts;
  for (auto _ : state) benchmark::DoNotOptimize(lasso::cv_select_lambda(p, opts));
}
BENCHMARK(BM_CrossValidation)->Arg(60)->Arg(650);

}  // namespace
