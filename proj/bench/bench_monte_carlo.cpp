// SPDX-License-Identifier: Apache-2.0
//
// Serial reference vs OpenMP Monte-Carlo kernel on the default inside world.
// Thread count follows OMP_NUM_THREADS.

#include "dtloc/analysis.hpp"
#include "dtloc/harness.hpp"

#include <benchmark/benchmark.h>
#include <omp.h>

namespace {

using namespace dtloc;

void run(benchmark::State& state, bool parallel) {
  const auto method = static_cast<Method>(state.range(0));
  ScenarioConfig cfg;
  RunOptions opts;
  opts.trials = static_cast<int>(state.range(1));
  for (auto _ : state) {
    PointStats s = parallel ? monte_carlo(cfg, method, opts) : monte_carlo_serial(cfg, method, opts);
    benchmark::DoNotOptimize(s.rmse.position);
  }
  state.SetItemsProcessed(state.iterations() * opts.trials);
  state.SetLabel(std::string(to_string(method)) + (parallel ? " threads=" + std::to_string(omp_get_max_threads()) : ""));
}

void BM_MonteCarloSerial(benchmark::State& state) { run(state, false); }
void BM_MonteCarloParallel(benchmark::State& state) { run(state, true); }

void BM_FimSdt(benchmark::State& state) {
  ScenarioConfig cfg;
  const AnchorLayout layout = build_layout(cfg);
  ParameterVector th = ParameterVector::zeros(2);
  th.p << 250, 350;
  th.v << 12, -7;
  for (auto _ : state) benchmark::DoNotOptimize(fim_sdt(th, layout, cfg.noise()).crlb);
}

void args(benchmark::internal::Benchmark* b) {
  for (Method m : {Method::SDT, Method::SDT_V, Method::LSPM_UVD}) b->Args({static_cast<long>(m), 2000});
  b->Unit(benchmark::kMillisecond);
}

}  // namespace

BENCHMARK(BM_MonteCarloSerial)->Apply(args);
BENCHMARK(BM_MonteCarloParallel)->Apply(args);
BENCHMARK(BM_FimSdt);

BENCHMARK_MAIN();
