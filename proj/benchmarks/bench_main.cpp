#include <benchmark/benchmark.h>

#include "qgt/distributions.hpp"
#include "qgt/fock.hpp"
#include "qgt/hypothesis_tests.hpp"

using namespace qgt;

static void BM_LaguerreNeg(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  double x = 0.37;
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_laguerre_neg(k, x));
    x += 1e-9;  // defeat value caching across iterations
  }
}
BENCHMARK(BM_LaguerreNeg)->Arg(8)->Arg(64)->Arg(512);

static void BM_NumberPmfRow(benchmark::State& state) {
  const int kmax = static_cast<int>(state.range(0));
  GaussianParams p{cplx(1.0, 0.5), 0.7};
  for (auto _ : state) {
    double acc = 0.0;
    for (int k = 0; k <= kmax; ++k) acc += number_pmf(p, k);
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_NumberPmfRow)->Arg(32)->Arg(256);

static void BM_BuildChi2(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    ThresholdTest t = build_chi2_test(n, 0.8, 0.05);
    benchmark::DoNotOptimize(t.gamma);
  }
}
BENCHMARK(BM_BuildChi2)->Arg(1)->Arg(10)->Arg(100);

static void BM_TThresholdRows(benchmark::State& state) {
  const long long smax = state.range(0);
  ConditionalTest ct = ConditionalTest::t_test(3, 0.1);
  for (auto _ : state) {
    double acc = 0.0;
    for (long long s = 0; s <= smax; ++s) acc += ct.t_row(s).gamma;
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_TThresholdRows)->Arg(50)->Arg(500);

static void BM_FThresholdRows(benchmark::State& state) {
  const long long smax = state.range(0);
  ConditionalTest ct = ConditionalTest::f_test(2, 3, 0.1);
  for (auto _ : state) {
    double acc = 0.0;
    for (long long s = 0; s <= smax; ++s) acc += ct.f_row(s).g1;
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_FThresholdRows)->Arg(30)->Arg(300);

static void BM_BeamSplitter(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  for (auto _ : state) {
    FockOperator u = beam_splitter(0.61548, d, d);
    benchmark::DoNotOptimize(u.data.data());
  }
}
BENCHMARK(BM_BeamSplitter)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_GaussianState(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  GaussianParams p{cplx(1.0, 0.0), 0.5};
  for (auto _ : state) {
    auto [rho, rep] = gaussian_state(p, d, 1.0);
    benchmark::DoNotOptimize(rho.data.data());
  }
}
BENCHMARK(BM_GaussianState)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_TraceAgainst(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  auto [rho, rep] = gaussian_state({cplx(0.8, 0.3), 0.6}, d, 1.0);
  FockOperator t{{d}, Eigen::MatrixXcd::Identity(d, d), true};
  t.data(0, 0) = 0.0;
  for (auto _ : state)
    benchmark::DoNotOptimize(trace_against(rho, t));
}
BENCHMARK(BM_TraceAgainst)->Arg(64)->Arg(128);

BENCHMARK_MAIN();
