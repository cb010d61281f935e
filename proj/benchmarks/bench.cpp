#include <benchmark/benchmark.h>

#include <numeric>
#include <random>

#include "linebots/chains.hpp"
#include "linebots/engine.hpp"
#include "linebots/limits.hpp"
#include "support/corpus.hpp"

namespace lb = linebots;

namespace {

lb::Configuration Line(std::size_t n) {
  std::mt19937_64 rng(n);
  auto x = lb::corpus::ConnectedLine(n, 1.0, rng, 0.05, 1.0);
  return lb::Configuration::FromPositions(std::move(x), {0, n - 1}, 1.0);
}

void BM_VisibleSet(benchmark::State& state) {
  const auto c = Line(static_cast<std::size_t>(state.range(0)));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lb::visible_set(c, i));
    i = (i + 1) % c.size();
  }
}
BENCHMARK(BM_VisibleSet)->Arg(10)->Arg(50)->Arg(1000);

void BM_Convergence1DStep(benchmark::State& state) {
  const auto c = Line(static_cast<std::size_t>(state.range(0)));
  std::vector<std::size_t> active(c.size());
  std::iota(active.begin(), active.end(), 0);
  for (auto _ : state) benchmark::DoNotOptimize(lb::step_convergence1d(c, active));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Convergence1DStep)->Arg(10)->Arg(50)->Arg(1000);

void BM_DetectEvents(benchmark::State& state) {
  const auto c = Line(static_cast<std::size_t>(state.range(0)));
  std::vector<std::size_t> active(c.size());
  std::iota(active.begin(), active.end(), 0);
  const auto next = lb::step_convergence1d(c, active);
  for (auto _ : state) benchmark::DoNotOptimize(lb::detect_events(c, next));
}
BENCHMARK(BM_DetectEvents)->Arg(10)->Arg(50)->Arg(1000);

void BM_RunToConvergence(benchmark::State& state) {
  const auto c = lb::corpus::TwoFault(static_cast<std::uint64_t>(state.range(0)), 30);
  lb::RunOptions options;
  options.scheduler = state.range(1) ? lb::Scheduler::kSsynch : lb::Scheduler::kFsynch;
  for (auto _ : state) benchmark::DoNotOptimize(lb::run(c, options).steps());
}
BENCHMARK(BM_RunToConvergence)->Args({1, 0})->Args({1, 1})->Unit(benchmark::kMillisecond);

void BM_ChainHierarchy(benchmark::State& state) {
  const auto c = lb::corpus::ReferenceHierarchy();
  for (auto _ : state) benchmark::DoNotOptimize(lb::chain_hierarchy(c));
}
BENCHMARK(BM_ChainHierarchy);

void BM_Certificate(benchmark::State& state) {
  const lb::Trace trace = lb::run(lb::corpus::Nested(3), {});
  for (auto _ : state) benchmark::DoNotOptimize(lb::earliest_size_stable(trace));
  state.counters["steps"] = static_cast<double>(trace.steps());
}
BENCHMARK(BM_Certificate)->Unit(benchmark::kMicrosecond);

void BM_DecayCheck(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(m);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> x(m + 1);
  for (double& xi : x) xi = u(rng);
  std::sort(x.begin(), x.end());
  x.front() = 0;
  x.back() = 1;
  lb::RunOptions options;
  options.rule = lb::Rule::kSpreading;
  const lb::Trace trace = lb::run(lb::Configuration::FromPositions(x, {}, 1.0), options);
  for (auto _ : state) benchmark::DoNotOptimize(lb::decay_check(trace));
}
BENCHMARK(BM_DecayCheck)->Arg(4)->Arg(16)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
