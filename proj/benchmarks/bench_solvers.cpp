#include "gkd/deflation.hpp"
#include "gkd/esvd.hpp"
#include "gkd/minres.hpp"
#include "gkd/problems.hpp"
#include "gkd/solver.hpp"

#include <benchmark/benchmark.h>

using namespace gkd;

namespace {

SaddlePointSystem channel(Index n) {
  ChannelSpec s;
  s.length_n = n;
  return build_1d_channel(s);
}

void BM_Factorize(benchmark::State& state) {
  const auto sys = channel(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(SpdFactor::factorize(sys.W));
}

void BM_Craig(benchmark::State& state) {
  const auto sys = channel(state.range(0));
  const auto F = SpdFactor::factorize(sys.W);
  Index its = 0;
  for (auto _ : state) {
    auto rep = craig_solve(sys, F, CraigOptions{});
    its = rep.iterations;
    benchmark::DoNotOptimize(rep.u.data());
  }
  state.counters["iterations"] = double(its);
}

// Deflation cost per iteration against the iterations it saves.
void BM_CraigDeflated(benchmark::State& state) {
  const auto sys = channel(state.range(0));
  const auto F = SpdFactor::factorize(sys.W);
  const auto t = esvd_direct(sys, F, state.range(1), Target::Smallest);
  const auto defl = make_deflation(sys, t);
  Index its = 0;
  for (auto _ : state) {
    auto rep = deflated_solve(sys, F, defl, CraigOptions{});
    its = rep.iterations;
    benchmark::DoNotOptimize(rep.u.data());
  }
  state.counters["iterations"] = double(its);
}

void BM_Minres(benchmark::State& state) {
  const auto sys = channel(state.range(0));
  const auto F = SpdFactor::factorize(sys.W);
  Index its = 0;
  for (auto _ : state) {
    auto rep = minres_preconditioned(sys, F, MinresOptions{});
    its = rep.iterations;
    benchmark::DoNotOptimize(rep.u.data());
  }
  state.counters["iterations"] = double(its);
}

void BM_MinresDeflated(benchmark::State& state) {
  const auto sys = channel(state.range(0));
  const auto F = SpdFactor::factorize(sys.W);
  const auto t = esvd_direct(sys, F, state.range(1), Target::Smallest);
  const Matrix Y = saddle_eigvecs_from_triplets(sys, F, t).Y;
  for (auto _ : state) benchmark::DoNotOptimize(minres_deflated(sys, F, Y, MinresOptions{}).u.data());
}

void BM_EsvdRestarted(benchmark::State& state) {
  const auto sys = channel(state.range(0));
  const auto F = SpdFactor::factorize(sys.W);
  EsvdOptions o;
  o.k = 10;
  o.eta = 28;
  o.max_iter = state.range(1);
  o.tol = 1e-300;
  for (auto _ : state) benchmark::DoNotOptimize(esvd_restarted(sys, F, o).triplets.sigma.data());
}

void BM_EsvdRecycled(benchmark::State& state) {
  const auto sys = channel(state.range(0));
  const auto F = SpdFactor::factorize(sys.W);
  for (auto _ : state) {
    RitzRecycler rec(sys.A, 5, Target::Smallest, 20);
    CraigOptions o;
    o.tol = 1e-10;
    o.observer = &rec;
    craig_solve(sys, F, o);
    benchmark::DoNotOptimize(rec.finish().triplets.sigma.data());
  }
}

void BM_EsvdDirect(benchmark::State& state) {
  const auto sys = channel(state.range(0));
  const auto F = SpdFactor::factorize(sys.W);
  for (auto _ : state) benchmark::DoNotOptimize(esvd_direct(sys, F, 10, Target::Smallest).sigma.data());
}

}  // namespace

BENCHMARK(BM_Factorize)->Arg(512)->Arg(4096);
BENCHMARK(BM_Craig)->Arg(128)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CraigDeflated)->Args({512, 10})->Args({512, 50})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Minres)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MinresDeflated)->Args({512, 10})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EsvdRestarted)->Args({512, 10})->Args({512, 30})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EsvdRecycled)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EsvdDirect)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
