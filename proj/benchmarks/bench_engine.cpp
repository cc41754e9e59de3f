#include <random>

#include <benchmark/benchmark.h>

#include "cspc/ces_solver.hpp"
#include "cspc/config.hpp"
#include "cspc/engine.hpp"

using namespace cspc;

namespace {

void BM_SolveDemand(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.5, 3.0);
  std::vector<DemandProblem> problems;
  for (int k = 0; k < 64; ++k) {
    DemandProblem p;
    for (std::size_t j = 0; j < n; ++j) {
      p.weights.push_back(u(rng));
      p.prices.push_back(u(rng));
    }
    p.budget = 10.0 * u(rng);
    p.total_cap = 3.0 * u(rng);
    problems.push_back(p);
  }
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_demand(problems[k++ % problems.size()]));
  }
}
BENCHMARK(BM_SolveDemand)->Arg(3)->Arg(6)->Arg(12);

// One full run; the range argument is the number of cycles.
void BM_Run(benchmark::State& state, const char* setting, const char* scenario) {
  auto c = preset(setting);
  apply_scenario(c, scenario);
  c.max_pccs = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_simulation(c));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK_CAPTURE(BM_Run, setting1_honest, "setting1", "scenario1-all-honest")
    ->RangeMultiplier(2)->Range(10, 80)->Complexity(benchmark::oN)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Run, setting2_one_honest, "setting2", "scenario2-one-honest")
    ->RangeMultiplier(2)->Range(10, 80)->Complexity(benchmark::oN)->Unit(benchmark::kMillisecond);

void BM_Workers(benchmark::State& state) {
  auto c = preset("setting2");
  c.max_pccs = 20;
  c.workers = static_cast<unsigned>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_simulation(c));
  }
}
BENCHMARK(BM_Workers)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
