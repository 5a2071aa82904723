#include "vcgmm/fpca.hpp"
#include "vcgmm/gmm.hpp"
#include "vcgmm/locallinear.hpp"
#include "vcgmm/simulate.hpp"

#include <benchmark/benchmark.h>

using namespace vcgmm;

namespace {

SimulatedReplicate replicate(std::size_t n)
{
  Scenario sc;
  sc.profile = VarianceProfile::s3;
  sc.snr = 1.0;
  sc.n = n;
  return generate(sc, 0);
}

MomentSample sample_for(const FunctionalDataset& data)
{
  const EstimatorConfig config;
  const auto init = lle_curve(data, 0.1, config.ridge_jitter);
  const auto vm = fit_variance(data.covariates(), integrated_sq_residuals(data, init, config), config);
  return moment_sample(data, build_instruments(data.covariates(), vm), init, 0.1);
}

void BM_LleCurve(benchmark::State& state)
{
  const auto rep = replicate(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(lle_curve(rep.data, 0.1));
}
BENCHMARK(BM_LleCurve)->Arg(50)->Arg(200)->Arg(500)->Unit(benchmark::kMicrosecond);

void BM_LineupGram(benchmark::State& state)
{
  const auto rep = replicate(static_cast<std::size_t>(state.range(0)));
  const auto sample = sample_for(rep.data);
  for (auto _ : state)
    benchmark::DoNotOptimize(lineup_eigen(sample));
}
BENCHMARK(BM_LineupGram)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_LineupFull(benchmark::State& state)
{
  const auto rep = replicate(static_cast<std::size_t>(state.range(0)));
  const auto cov = moment_covariance(sample_for(rep.data));
  for (auto _ : state)
    benchmark::DoNotOptimize(lineup_eigen(cov));
}
BENCHMARK(BM_LineupFull)->Arg(50)->Unit(benchmark::kMillisecond)->Iterations(3);

void BM_EstimateFull(benchmark::State& state)
{
  const auto rep = replicate(static_cast<std::size_t>(state.range(0)));
  EstimatorConfig config;
  config.workers = 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(estimate_full(rep.data, config));
}
BENCHMARK(BM_EstimateFull)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
