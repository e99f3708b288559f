#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "dpdgt/graph.hpp"
#include "dpdgt/presets.hpp"
#include "dpdgt/privacy.hpp"
#include "dpdgt/problem.hpp"
#include "dpdgt/solver.hpp"

using namespace dpdgt;

namespace {

// Ring plus one chord per agent, so n can grow without losing strong connectivity.
CommGraph ring_graph(std::size_t n) {
  EdgeList e;
  for (std::size_t i = 0; i < n; ++i) {
    e.emplace_back((i + 1) % n, i);
    e.emplace_back((i + n / 2) % n, i);
  }
  return build_uniform_weights(n, e, e);
}

AllocationProblem ring_problem(std::size_t n) {
  std::vector<Agent> agents;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 0.02 + 0.001 * static_cast<double>(i % 7);
    agents.push_back({std::make_shared<const QuadraticBoxCost>(a, 2.0, 0.0, 0.0, 100.0), {20.0}});
  }
  return AllocationProblem(std::move(agents));
}

}  // namespace

static void BM_DpdgtStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const AllocationProblem prob = ring_problem(n);
  const CommGraph g = ring_graph(n);
  const ScheduleSet s = presets::ieee14_convergence_schedules();
  const NoiseSource noise(7);
  SolverState st = initial_state(prob);
  for (auto _ : state) {
    st = dpdgt_step(st, prob, g, s, noise).next;
    benchmark::DoNotOptimize(st.w.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DpdgtStep)->RangeMultiplier(4)->Range(16, 1024);

static void BM_BaselineStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const AllocationProblem prob = ring_problem(n);
  const CommGraph g = ring_graph(n);
  const ScheduleSet s = presets::ieee14_comparison_schedules();
  const BaselineSchedule base;
  const NoiseSource noise(7);
  SolverState st = baseline_initial_state(prob, base.iota);
  for (auto _ : state) {
    st = ddgt_baseline_step(st, prob, g, s, base, noise).next;
    benchmark::DoNotOptimize(st.w.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BaselineStep)->RangeMultiplier(4)->Range(16, 1024);

static void BM_Ieee14Run(benchmark::State& state) {
  const AllocationProblem prob = presets::ieee14_problem();
  const CommGraph g = presets::ieee14_graph();
  const ScheduleSet s = presets::ieee14_convergence_schedules();
  RunOptions o;
  o.n_iters = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run(prob, g, s, o).terminal.err_sq);
}
BENCHMARK(BM_Ieee14Run)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

static void BM_SpectralAnalysis(benchmark::State& state) {
  const CommGraph g = ring_graph(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(spectral_analysis(g, 0.5, 0.5).rho_r);
}
BENCHMARK(BM_SpectralAnalysis)->Arg(14)->Arg(64)->Arg(256);

static void BM_CentralizedSolve(benchmark::State& state) {
  const AllocationProblem prob = ring_problem(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(centralized_solve(prob).multiplier(0));
}
BENCHMARK(BM_CentralizedSolve)->Arg(14)->Arg(1024);

static void BM_SensitivityDynamics(benchmark::State& state) {
  const ScheduleSet s = presets::ieee14_convergence_schedules();
  const auto horizon = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sensitivity_dynamics(s, 0.06, 1.0, horizon).eta.back());
}
BENCHMARK(BM_SensitivityDynamics)->Arg(1000)->Arg(100000);

static void BM_NumericEpsilon(benchmark::State& state) {
  const ScheduleSet s = presets::ieee14_convergence_schedules();
  for (auto _ : state)
    benchmark::DoNotOptimize(cumulative_epsilon(s, 0.06, 1.0, EtaMode::kNumeric).epsilon);
}
BENCHMARK(BM_NumericEpsilon);

BENCHMARK_MAIN();
