// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "rwfbm/fbm.hpp"
#include "rwfbm/hierarchy.hpp"
#include "rwfbm/oracle.hpp"

using namespace rwfbm;

namespace {

TruncationPolicy capped(double past) {
  TruncationPolicy p;
  p.max_past_horizon = past;
  return p;
}

HierarchyOptions lean() {
  HierarchyOptions o;
  o.keep_stopping_times = false;
  return o;
}

void BM_HierarchyGenerate(benchmark::State& state) {
  const auto m = static_cast<unsigned>(state.range(0));
  std::uint64_t seed = 1;
  for (auto _ : state) {
    TwoSidedBm bm(seed++, lean(), lean());
    bm.right().ensure(m, 1.0);
    benchmark::DoNotOptimize(bm.grid_value(m, 1));
  }
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << (2 * m)));
}
BENCHMARK(BM_HierarchyGenerate)->DenseRange(6, 11)->Unit(benchmark::kMillisecond);

void BM_FbmGrid(benchmark::State& state) {
  const auto m = static_cast<unsigned>(state.range(0));
  const double past = static_cast<double>(state.range(1));
  const Kernel kernel(0.75);
  TwoSidedBm bm(7, lean(), lean());
  bm.extend(m, 1.0, past);
  for (auto _ : state)
    benchmark::DoNotOptimize(fbm_grid_values(bm, m, kernel, 1.0, capped(past)).values.back());
}
BENCHMARK(BM_FbmGrid)->ArgsProduct({{6, 8, 10}, {1, 16}})->Unit(benchmark::kMillisecond);

void BM_FbmGridEvery4(benchmark::State& state) {
  const auto m = static_cast<unsigned>(state.range(0));
  const Kernel kernel(0.75);
  TwoSidedBm bm(7, lean(), lean());
  bm.extend(m, 1.0, 1.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(fbm_grid_values_every4(bm, m, kernel, 1.0, capped(1)).back());
}
BENCHMARK(BM_FbmGridEvery4)->DenseRange(7, 11, 2)->Unit(benchmark::kMillisecond);

void BM_FbmValue(benchmark::State& state) {
  const auto m = static_cast<unsigned>(state.range(0));
  const Kernel kernel(0.75);
  TwoSidedBm bm(3, lean(), lean());
  bm.extend(m, 1.0, 16.0);
  const auto w = moving_average_weights(std::uint64_t{1} << (2 * m), m, kernel, capped(16));
  for (auto _ : state)
    benchmark::DoNotOptimize(fbm_value(bm, m, w));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.values.size()));
}
BENCHMARK(BM_FbmValue)->Arg(8)->Arg(10);

void BM_MovingAverageWeights(benchmark::State& state) {
  const auto m = static_cast<unsigned>(state.range(0));
  const Kernel kernel(0.75);
  for (auto _ : state)
    benchmark::DoNotOptimize(moving_average_weights(std::uint64_t{1} << (2 * m), m, kernel, capped(16)).values[0]);
}
BENCHMARK(BM_MovingAverageWeights)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_ReferenceSampler(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i)
    grid[i] = static_cast<double>(i + 1) / static_cast<double>(n);
  const ReferenceSampler sampler(grid, 0.75);
  std::uint64_t seed = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(sampler.sample(seed++).back());
}
BENCHMARK(BM_ReferenceSampler)->Arg(256)->Arg(1024);

} // namespace
BENCHMARK_MAIN();
