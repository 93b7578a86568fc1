#include <benchmark/benchmark.h>

#include "phosml/kernels.hpp"
#include "phosml/learners.hpp"
#include "phosml/rng.hpp"

using namespace phosml;

namespace {

Matrix random_rows(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = rng.uniform(-1.0, 1.0);
  return m;
}

void BM_pairwise_serial(benchmark::State& state) {
  const auto x = random_rows(state.range(0), 50, 1);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::pairwise_distances(x));
}

void BM_pairwise_omp(benchmark::State& state) {
  const auto x = random_rows(state.range(0), 50, 1);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::pairwise_distances(x));
}

void BM_rbf_gram_serial(benchmark::State& state) {
  const auto a = random_rows(state.range(0), 50, 2);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::rbf_gram(a, a, 0.02));
}

void BM_rbf_gram_omp(benchmark::State& state) {
  const auto a = random_rows(state.range(0), 50, 2);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::rbf_gram(a, a, 0.02));
}

void forest_fit(benchmark::State& state, bool parallel) {
  const auto x = random_rows(state.range(0), 50, 3);
  std::vector<double> y(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) y[r] = x(r, 0) * x(r, 1) + x(r, 2);
  const auto p = forest_params(resolve_params(LearnerKind::RandomForest, {{"n_trees", 50.0}}));
  for (auto _ : state) benchmark::DoNotOptimize(train_forest(x, y, p, 7, parallel));
}

void BM_forest_fit_serial(benchmark::State& state) { forest_fit(state, false); }
void BM_forest_fit_omp(benchmark::State& state) { forest_fit(state, true); }

}  // namespace

BENCHMARK(BM_pairwise_serial)->Arg(206)->Arg(800);
BENCHMARK(BM_pairwise_omp)->Arg(206)->Arg(800);
BENCHMARK(BM_rbf_gram_serial)->Arg(206)->Arg(800);
BENCHMARK(BM_rbf_gram_omp)->Arg(206)->Arg(800);
BENCHMARK(BM_forest_fit_serial)->Arg(165)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_forest_fit_omp)->Arg(165)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
