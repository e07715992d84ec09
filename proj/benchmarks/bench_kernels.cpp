// Hot kernels of a fit: special functions, pmf tables, the transition likelihood
// and blocks of adaptive Metropolis iterations.

#include <benchmark/benchmark.h>

#include "glkinar/bayes.hpp"
#include "glkinar/glk_dist.hpp"
#include "glkinar/inar.hpp"
#include "glkinar/special_fns.hpp"

using namespace glkinar;

namespace {

const GlkParams kInnovation(5.3239, 0.0592, 0.6, 0.5917);

CountSeries paper_series(double alpha, std::size_t length) {
  Rng rng(42);
  return simulate(InarModel::glk(alpha, kInnovation), length, StationaryWarmup{}, rng);
}

void BM_LogGamma(benchmark::State& state) {
  double x = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_gamma(x));
    x = x < 1000.0 ? x * 1.37 : 0.5;
  }
}
BENCHMARK(BM_LogGamma);

void BM_GlkLogPmf(benchmark::State& state) {
  std::int64_t x = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(glk_log_pmf(kInnovation, x));
    x = (x + 7) % 120;
  }
}
BENCHMARK(BM_GlkLogPmf);

void BM_GlkPmfTable(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(glk_pmf_table(kInnovation));
}
BENCHMARK(BM_GlkPmfTable);

void BM_TransitionLikelihood(benchmark::State& state) {
  const double alpha = static_cast<double>(state.range(0)) / 10.0;
  const CountSeries data = paper_series(alpha, 1000);
  const TransitionLikelihood likelihood(data);
  const InarModel model = InarModel::glk(alpha, kInnovation);
  for (auto _ : state) benchmark::DoNotOptimize(likelihood(model));
}
BENCHMARK(BM_TransitionLikelihood)->Arg(3)->Arg(7)->Unit(benchmark::kMicrosecond);

// 1000 adaptive Metropolis iterations of the GLK posterior on T = 1000
void BM_AmcmcBlock(benchmark::State& state) {
  const CountSeries data = paper_series(0.7, 1000);
  AmcmcConfig config;
  config.iterations = 1000;
  config.burn_in = 0;
  config.thin = 1;
  for (auto _ : state) benchmark::DoNotOptimize(amcmc_run(data, PriorSpec{}, ModelVariant::Glk, config));
}
BENCHMARK(BM_AmcmcBlock)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
