// Compares the serial reference coverage engine against the OpenMP kernels.
// The two must produce identical counts (asserted in the unit tests); this
// target measures the speedup.

#include <benchmark/benchmark.h>

#include "bvn/coverage.hpp"

using namespace bvn;

namespace {

CoverageOptions options(ExecMode exec) {
  CoverageOptions opts;
  opts.inner_draws = 1000;
  opts.exec = exec;
  return opts;
}

void run_coverage(benchmark::State& state, ExecMode exec) {
  const BvnParams truth(0.0, 0.0, 1.0, 1.0, 0.5);
  const RngStream rng(42);
  for (auto _ : state) {
    const CoverageResult res =
        simulate_coverage(PriorSpec::right_haar(), ParamFn::Tag::Rho, truth, 3,
                          0.95, 2000, rng, options(exec));
    benchmark::DoNotOptimize(res.coverage);
  }
}

void run_identity(benchmark::State& state, ExecMode exec) {
  const PivotalSpec spec{PivotalSpec::Which::RhoIdentity, 1.0, 2.0, 0.5, 3};
  IdentityOptions opts;
  opts.inner_draws = 1000;
  opts.exec = exec;
  const RngStream rng(42);
  for (auto _ : state) {
    const double v = coverage_identity(spec, 0.95, 2000, rng, opts);
    benchmark::DoNotOptimize(v);
  }
}

void BM_coverage_serial(benchmark::State& state) {
  run_coverage(state, ExecMode::Serial);
}
void BM_coverage_parallel(benchmark::State& state) {
  run_coverage(state, ExecMode::Parallel);
}
void BM_identity_serial(benchmark::State& state) {
  run_identity(state, ExecMode::Serial);
}
void BM_identity_parallel(benchmark::State& state) {
  run_identity(state, ExecMode::Parallel);
}

BENCHMARK(BM_coverage_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_coverage_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_identity_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_identity_parallel)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
