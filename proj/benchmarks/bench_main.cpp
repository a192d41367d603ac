#include <benchmark/benchmark.h>

#include "copula_oed/design.hpp"

using namespace copula_oed;

namespace {

void BM_CopulaCdf(benchmark::State& state) {
  const auto family = static_cast<Family>(state.range(0));
  const BaseCopula c(family, tau_inverse(family, 0.6));
  double u = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(c.cdf(u, 0.7));
    u = u < 0.9 ? u + 1e-3 : 0.1;
  }
  state.SetLabel(std::string(family_name(family)));
}
BENCHMARK(BM_CopulaCdf)->DenseRange(1, 4);

void BM_BinaryMixtureFim(benchmark::State& state) {
  const auto m = BinaryLogitModel::mixture(Family::Clayton, Family::Gumbel, TauLink::calibrated(0.05, 0.9, 10.0), 0.5);
  const ParamVector g = m.nominal();
  double x = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(m.fim(x, g.values()));
    x = x < 9.9 ? x + 0.05 : 0.0;
  }
}
BENCHMARK(BM_BinaryMixtureFim);

void BM_MarshallOlkinFim(benchmark::State& state) {
  const auto m = WeibullModel::marshall_olkin();
  const ParamVector g = m.nominal();
  double x = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(m.fim(x, g.values()));
    x = x < 0.99 ? x + 0.01 : 0.0;
  }
}
BENCHMARK(BM_MarshallOlkinFim);

void BM_FedorovKernel(benchmark::State& state) {
  const FedorovModel m(BaseCopula(Family::Clayton, 18.0), static_cast<std::size_t>(state.range(0)));
  double a = 18.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(m.kernel_for(a));
    a += 1e-6;
  }
}
BENCHMARK(BM_FedorovKernel)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_OptimizeWeights(benchmark::State& state) {
  const auto m = BinaryLogitModel::mixture(Family::Joe, Family::Frank, TauLink::calibrated(0.05, 0.9, 10.0), 0.5);
  const ParamVector g = m.nominal();
  const auto grid = uniform_grid(m.design_space(), static_cast<std::size_t>(state.range(0)));
  const auto fims = candidate_fims(m, grid, g);
  for (auto _ : state) benchmark::DoNotOptimize(optimize_weights(fims, CriterionSpec::ds(1), OptimizerConfig{}));
}
BENCHMARK(BM_OptimizeWeights)->Arg(101)->Arg(201)->Unit(benchmark::kMillisecond);

void BM_OptimizeDesign(benchmark::State& state) {
  const auto m = BinaryLogitModel::mixture(Family::Clayton, Family::Gumbel, TauLink::calibrated(0.05, 0.3, 10.0), 0.5);
  const ParamVector g = m.nominal();
  const auto grid = uniform_grid(m.design_space(), 201);
  for (auto _ : state) {
    const CachedModel cached(m);
    benchmark::DoNotOptimize(optimize_design(cached, g, CriterionSpec::d(), grid));
  }
}
BENCHMARK(BM_OptimizeDesign)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace
BENCHMARK_MAIN();
