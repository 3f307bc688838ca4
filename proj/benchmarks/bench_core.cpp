#include <benchmark/benchmark.h>

#include "mrraps/diagnostics.hpp"
#include "mrraps/prior_model.hpp"
#include "mrraps/raps.hpp"
#include "mrraps/simulation.hpp"

using namespace mrraps;

namespace {

const SummarySet& noo_data() {
  static const SummarySet d = sim::generate(sim::SimSetting::preset("NOO"), 1).data;
  return d;
}

const SpikeSlabPrior& noo_prior() {
  static const SpikeSlabPrior p = fit_prior(exposure_z_scores(noo_data())).prior;
  return p;
}

void BM_PosteriorMoments(benchmark::State& state) {
  const SpikeSlabPrior prior{0.92, 0.47 * 0.47, 3.48 * 3.48};
  double z = -4.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(posterior_moments(z, 1.0, prior));
    z = z > 4.0 ? -4.0 : z + 0.01;
  }
}
BENCHMARK(BM_PosteriorMoments);

void BM_EbWeightSweep(benchmark::State& state) {
  const auto& d = noo_data();
  for (auto _ : state) {
    double s = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) s += eb_weight(0.2, 3.8e-5, d.stats(j), noo_prior());
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d.size()));
}
BENCHMARK(BM_EbWeightSweep);

void BM_FitPrior(benchmark::State& state) {
  const auto z = exposure_z_scores(noo_data());
  for (auto _ : state) benchmark::DoNotOptimize(fit_prior(z));
}
BENCHMARK(BM_FitPrior)->Unit(benchmark::kMillisecond);

void BM_EstimatingFunctions(benchmark::State& state) {
  const auto& d = noo_data();
  const PsiFunction psi = PsiFunction::huber();
  for (auto _ : state) benchmark::DoNotOptimize(estimating_functions(0.2, 3.8e-5, d, noo_prior(), psi));
}
BENCHMARK(BM_EstimatingFunctions)->Unit(benchmark::kMicrosecond);

void BM_Solve(benchmark::State& state) {
  RapsOptions o;
  o.weight_mode = state.range(0) ? WeightMode::shrinkage : WeightMode::mle;
  for (auto _ : state) benchmark::DoNotOptimize(solve(noo_data(), noo_prior(), o));
}
BENCHMARK(BM_Solve)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_HeterogeneityTest(benchmark::State& state) {
  RapsOptions o;
  const RapsFit f = solve(noo_data(), noo_prior(), o);
  const auto recs = diagnostic_table(f, noo_data(), noo_prior());
  for (auto _ : state) benchmark::DoNotOptimize(heterogeneity_test(recs, default_het_df(recs.size())));
}
BENCHMARK(BM_HeterogeneityTest)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
