#include "hamid/chain.hpp"
#include "hamid/era.hpp"
#include "hamid/robustness.hpp"
#include "hamid/solver.hpp"

#include <benchmark/benchmark.h>

using namespace hamid;

namespace {

struct Benchmark3 {
  Experiment experiment = chain_experiment(benchmark_chain());
  CoherenceSystem system = experiment.system();
  TransferFunction target;

  Benchmark3() {
    const TimeTrace tr = simulate_trace(system, 0.0598, samples_for_duration(20.0, 0.0598));
    const Realization real = continuous_generator(era_from_trace(tr), 0.0598);
    target = transfer_coefficients(*real.Acont, real.Chat, real.x0hat);
  }
};

const Benchmark3& fixture() {
  static const Benchmark3 b;
  return b;
}

void multi_start_solve(benchmark::State& state, Execution mode) {
  const Benchmark3& b = fixture();
  SolveConfig cfg;
  cfg.starts = static_cast<std::size_t>(state.range(0));
  cfg.execution = mode;
  for (auto _ : state) {
    SolveReport rep = solve(b.experiment.model, b.target, b.system, cfg);
    benchmark::DoNotOptimize(rep.best_residual);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void robustness_sweep(benchmark::State& state, Execution mode) {
  const Benchmark3& b = fixture();
  RobustnessConfig cfg;
  cfg.sigmas = {0.05};
  cfg.trajectories = static_cast<std::size_t>(state.range(0));
  cfg.identify.solve.starts = 8;
  cfg.execution = mode;
  for (auto _ : state) {
    RobustnessReport rep = run_robustness(b.experiment, cfg);
    benchmark::DoNotOptimize(rep.results.front().converged);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK_CAPTURE(multi_start_solve, serial, Execution::serial)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(multi_start_solve, parallel, Execution::parallel)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(robustness_sweep, serial, Execution::serial)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(robustness_sweep, parallel, Execution::parallel)->Arg(16)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
