#include <cmath>

#include <benchmark/benchmark.h>

#include "esn2/expected_info.hpp"
#include "esn2/fit.hpp"
#include "esn2/likelihood.hpp"
#include "esn2/validation.hpp"

namespace {

using namespace esn2;

const DpParams kDp{0, 0, 1, 0.6, 1, 2, 3, 1};

const Dataset& sample(std::size_t n) {
  static const Dataset data = sample_esn2(kDp, 100'000, RngSeed{7});
  static const Dataset small = data.slice(0, 1'000);
  return n == 1'000 ? small : data;
}

void BM_Loglik(benchmark::State& state) {
  const Dataset& data = sample(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(loglik(kDp, data));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(data.size()));
}
BENCHMARK(BM_Loglik)->Arg(1'000)->Arg(100'000);

void BM_Score(benchmark::State& state) {
  const Dataset& data = sample(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(score(kDp, data));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(data.size()));
}
BENCHMARK(BM_Score)->Arg(1'000)->Arg(100'000);

void BM_ObservedInfo(benchmark::State& state) {
  const Dataset& data = sample(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(observed_info(kDp, data));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(data.size()));
}
BENCHMARK(BM_ObservedInfo)->Arg(1'000)->Arg(100'000);

void BM_ExpectedInfo(benchmark::State& state) {
  const CubatureControls c{std::pow(10.0, -static_cast<double>(state.range(0))), 1e-15, 20'000'000};
  for (auto _ : state) benchmark::DoNotOptimize(expected_info(kDp, c));
}
BENCHMARK(BM_ExpectedInfo)->Arg(6)->Arg(9)->Unit(benchmark::kMillisecond);

void BM_ExpectedInfoExtended(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(expected_info_extended(kDp));
}
BENCHMARK(BM_ExpectedInfoExtended)->Unit(benchmark::kMillisecond);

void BM_DetScan(benchmark::State& state) {
  const SweepSpec spec{SweepParam::alpha1, linear_grid(-4, 4, 81), DpParams{0, 0, 1, 0, 1, 0, 0, 0}};
  for (auto _ : state) benchmark::DoNotOptimize(det_scan(spec));
}
BENCHMARK(BM_DetScan)->Unit(benchmark::kMillisecond);

void BM_Fit(benchmark::State& state) {
  const Dataset data = sample_esn2(DpParams{0, 0, 1, 0.5, 1, 1.5, -1, 0.5}, 10'000, RngSeed{3});
  const DpParams start{0.3, -0.3, 1.4, 0.3, 0.7, 0.8, -0.3, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(fit_mle(data, start));
}
BENCHMARK(BM_Fit)->Unit(benchmark::kMillisecond);

void BM_Sampler(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(sample_esn2(kDp, 100'000, RngSeed{11}));
  state.SetItemsProcessed(state.iterations() * 100'000);
}
BENCHMARK(BM_Sampler)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
