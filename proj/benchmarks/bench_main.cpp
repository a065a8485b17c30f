// Microbenchmarks for the hot paths: the QR recursion step, inducing scheme
// construction, branch pullbacks, and the Ulam solve.

#include <benchmark/benchmark.h>

#include "lorenzlab/cocycle.hpp"
#include "lorenzlab/experiment.hpp"
#include "lorenzlab/inducing.hpp"
#include "lorenzlab/lyapunov.hpp"
#include "lorenzlab/measure.hpp"

using namespace lorenzlab;

namespace {

const inducing::InducingScheme& bench_scheme() {
  static const inducing::InducingScheme s = [] {
    inducing::SchemeParams p;
    p.max_time = 22;
    p.min_length = 1e-8;
    return inducing::build_inducing_scheme(model::LorenzMapParams{}, p);
  }();
  return s;
}

const measure::DensityEstimate& bench_density() {
  static const measure::DensityEstimate d =
      measure::ulam_density(model::LorenzMapParams{}, 512, 100, 1);
  return d;
}

void BM_qr_spectrum_step(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto& s = bench_scheme();
  const auto probs = measure::branch_measure(s, bench_density());
  const auto symbols_top = experiment::top_symbols(probs, 16);
  const auto gen = cocycle::sample_fiber_bunched(1, d, 1, symbols_top, 0.5 / d, 0.25, 1.0, 0.95);
  const auto src = measure::OrbitSource::bernoulli(&s, probs);
  const auto symbols = src.symbols(3, 4096);
  for (auto _ : state) {
    const auto spec = lyapunov::qr_spectrum_symbols(gen, symbols, 4000);
    benchmark::DoNotOptimize(spec.exponents[0]);
  }
  state.SetItemsProcessed(state.iterations() * 4000);
}

void BM_build_scheme(benchmark::State& state) {
  inducing::SchemeParams p;
  p.max_time = static_cast<int>(state.range(0));
  p.min_length = 1e-7;
  for (auto _ : state) {
    const auto s = inducing::build_inducing_scheme(model::LorenzMapParams{}, p);
    benchmark::DoNotOptimize(s.coverage);
  }
}

void BM_branch_pullback(benchmark::State& state) {
  const auto& s = bench_scheme();
  const auto& b = s.branches.back();
  double y = 0.1;
  for (auto _ : state) {
    y = s.induced_inverse(b, y);
    benchmark::DoNotOptimize(y);
    y = 0.1 + 0.5 * y;  // keep the argument inside Ihat
  }
}

void BM_ulam_density(benchmark::State& state) {
  for (auto _ : state) {
    const auto d = measure::ulam_density(model::LorenzMapParams{}, 512, 50, 1);
    benchmark::DoNotOptimize(d.fixed_point_residual);
  }
}

void BM_jacobian_ratio(benchmark::State& state) {
  const auto& s = bench_scheme();
  const auto src = measure::OrbitSource::induced(&s);
  const auto orb = src.orbit(7, 200);
  std::vector<int> past, future;
  for (int k = 1; k <= 40; ++k) past.push_back(orb.symbols[static_cast<std::size_t>(80 - k)]);
  for (int k = 0; k < 40; ++k) future.push_back(orb.symbols[static_cast<std::size_t>(80 + k)]);
  const auto x = inducing::Itinerary::make_bilateral(past, future);
  const auto ref = inducing::Itinerary::unilateral(std::vector<int>(40, 1));
  const auto own = inducing::Itinerary::unilateral(future);
  for (auto _ : state) {
    benchmark::DoNotOptimize(measure::jacobian_ratio(s, ref, own, x, 30));
  }
}

}  // namespace

BENCHMARK(BM_qr_spectrum_step)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_build_scheme)->Arg(14)->Arg(18)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_branch_pullback);
BENCHMARK(BM_ulam_density)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_jacobian_ratio)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
