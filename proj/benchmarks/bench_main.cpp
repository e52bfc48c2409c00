#include <benchmark/benchmark.h>

#include <vector>

#include "ldboot/measures.hpp"
#include "ldboot/montecarlo.hpp"
#include "ldboot/rates.hpp"
#include "ldboot/rng.hpp"
#include "ldboot/samplers.hpp"
#include "ldboot/transforms.hpp"

namespace {

using namespace ldboot;

std::vector<double> uniform_atoms(Rng& rng, std::int64_t n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (double& x : v) x = rng.uniform();
  return v;
}

void BM_W1Line(benchmark::State& state) {
  Rng rng(1);
  const AtomicWeightMeasure a(uniform_atoms(rng, state.range(0)));
  const AtomicWeightMeasure b(uniform_atoms(rng, state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(w1_line(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_W1Line)->RangeMultiplier(8)->Range(8, 1 << 15)->Complexity();

void BM_LegendreNumeric(benchmark::State& state) {
  const CgfSpec c = CgfSpec::binomial(5);
  double x = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(legendre_numeric(c, x));
    x = x > 4.9 ? 0.01 : x + 0.37;
  }
}
BENCHMARK(BM_LegendreNumeric);

void BM_MultinomialWeights(benchmark::State& state) {
  Rng rng(2);
  const std::int64_t n = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(sample_multinomial_weights(n, n, rng));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_MultinomialWeights)->Range(64, 1 << 14);

void BM_HypergeometricWeights(benchmark::State& state) {
  Rng rng(3);
  const std::int64_t n = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(sample_hypergeometric_weights(n, 3, rng));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_HypergeometricWeights)->Range(64, 1 << 14);

void BM_TiltedEfron(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  const FiniteMeasure nu({0.8, 0.2});
  const std::vector<std::int64_t> composition{n / 2, n - n / 2};
  Rng rng(4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(tilted_efron_estimator(n, n, composition, nu, 0.05, 1000, rng));
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_TiltedEfron)->Arg(100)->Arg(400)->Arg(1600);

void BM_RateConditionalGeneral(benchmark::State& state) {
  const FiniteMeasure nu({0.5, 0.3, 0.2});
  const FiniteMeasure mu({0.2, 0.3, 0.5});
  const TabulatedLaw xi = discretize_scaled_poisson(1.0, 1e-10, 2.5);
  for (auto _ : state) benchmark::DoNotOptimize(rate_conditional_general(nu, mu, xi));
}
BENCHMARK(BM_RateConditionalGeneral);

}  // namespace

BENCHMARK_MAIN();
