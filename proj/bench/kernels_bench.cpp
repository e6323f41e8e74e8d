#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>

#include "picres/kernels.hpp"
#include "picres/reserving.hpp"

using namespace picres;

namespace {

MixtureCopula bench_mixture() {
  return MixtureCopula({{1.0, {Family::Clayton, 2.0}}, {1.0, {Family::Gumbel, 1.5}}, {1.0, {Family::Frank, 3.0}}});
}

void BM_QuadratureSerial(benchmark::State& st) {
  const auto mix = bench_mixture();
  for (auto _ : st) benchmark::DoNotOptimize(copula_integral_serial(mix, 2, static_cast<int>(st.range(0))));
}

void BM_QuadratureParallel(benchmark::State& st) {
  const auto mix = bench_mixture();
  for (auto _ : st) benchmark::DoNotOptimize(copula_integral(mix, 2, static_cast<int>(st.range(0))));
}

void BM_TailSerial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(tail_counts_serial({Family::Clayton, 2.0}, st.range(0), 1e-2, false, 7));
}

void BM_TailParallel(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(tail_counts({Family::Clayton, 2.0}, st.range(0), 1e-2, false, 7));
}

struct PredictiveFixture {
  ClaimsTriangle tri;
  ModelConfig model;
  std::vector<ChainState> draws;
  std::unique_ptr<SamplerContext> ctx;

  explicit PredictiveFixture(int n) {
    const int J = 6;
    model.kind = ModelKind::I;
    model.hyper = HyperPriors::defaults(J);
    model.init = make_factors(J, 0.0, 0.0, 0.1, 0.05);
    DevelopmentFactors truth = model.init;
    truth.phi(0) = 7.0;
    for (int j = 1; j <= J; ++j) truth.phi(j) = 0.3;
    Rng rng = make_rng(3, 0);
    tri = simulate_like(truth, rng);
    ctx = std::make_unique<SamplerContext>(tri, model, AMConfig{});
    Rng init = make_rng(3, 1);
    draws.assign(n, initial_state(*ctx, 0.0, init));
  }

  static ClaimsTriangle simulate_like(const DevelopmentFactors& t, Rng& rng) {
    const int J = t.J();
    MatrixXd P(J + 1, J + 1), I(J + 1, J + 1);
    for (int i = 0; i <= J; ++i) {
      double lp = 0.0;
      for (int j = 0; j <= J; ++j) P(i, j) = std::exp(lp += t.phi(j) + t.sigma(j) * std_normal(rng));
      I(i, J) = P(i, J);
      for (int j = J - 1; j >= 0; --j) I(i, j) = I(i, j + 1) * std::exp(-(t.psi(j) + t.tau(j) * std_normal(rng)));
    }
    return make_triangle(P, I);
  }
};

void BM_PredictiveSerial(benchmark::State& st) {
  PredictiveFixture f(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(predictive_ultimate_serial(*f.ctx, f.draws, 11));
}

void BM_PredictiveParallel(benchmark::State& st) {
  PredictiveFixture f(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(predictive_ultimate(*f.ctx, f.draws, 11));
}

}  // namespace

BENCHMARK(BM_QuadratureSerial)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_QuadratureParallel)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TailSerial)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TailParallel)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictiveSerial)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictiveParallel)->Arg(2000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
