// Microbenchmarks for the per-iteration building blocks: the two beamformer
// updates, one transmit surrogate step, and a full outer iteration in
// centralized vs decentralized form as the array grows.

#include <benchmark/benchmark.h>

#include "fawsr/channel.hpp"
#include "fawsr/fp.hpp"
#include "fawsr/harness.hpp"
#include "fawsr/mm.hpp"

using namespace fawsr;

namespace {

harness::ScenarioSpec spec_for(int num_tx) {
  harness::ScenarioSpec spec;
  spec.num_tx = num_tx;
  spec.num_clusters = 4;
  spec.seed = 7;
  return spec;
}

solver::SolverState warm_state(const Scenario& scenario) {
  auto layout = layout::build(scenario, true, true);
  auto state = solver::initialize(scenario, layout);
  solver::update_auxiliaries(state);
  return state;
}

void bm_beamformer_bisection(benchmark::State& bench) {
  const Scenario scenario = spec_for(static_cast<int>(bench.range(0))).sample(0);
  auto state = warm_state(scenario);
  for (auto _ : bench) {
    auto result = fp::update_w_bisection(state.channels, state.aux.gamma,
                                         state.aux.phi, state.beams.weights,
                                         state.beams.power_budget);
    benchmark::DoNotOptimize(result.W);
  }
}

void bm_beamformer_inverse_free(benchmark::State& bench) {
  const Scenario scenario = spec_for(static_cast<int>(bench.range(0))).sample(0);
  auto state = warm_state(scenario);
  state.aux.eta = fp::nonhomogeneous_eta(state.channels, state.aux.gamma, state.aux.phi);
  for (auto _ : bench) {
    auto next = fp::update_w_inverse_free(state.channels, state.aux.gamma,
                                          state.aux.phi, state.aux,
                                          state.beams.weights, 3,
                                          state.beams.power_budget);
    benchmark::DoNotOptimize(next);
  }
}

void bm_tx_surrogate_step(benchmark::State& bench) {
  const Scenario scenario = spec_for(static_cast<int>(bench.range(0))).sample(0);
  auto state = warm_state(scenario);
  for (auto _ : bench) {
    const auto deriv = mm::tx_derivatives(state.channels, state.beams,
                                          state.aux.gamma, state.aux.phi,
                                          scenario.geometry);
    const double delta = mm::delta_tx(deriv, state.beams, state.aux.gamma,
                                      state.aux.phi, state.channels,
                                      scenario.geometry);
    mm::SurrogateCoeffs coeffs{mm::grad_tx(deriv, scenario.geometry, state.layout),
                               delta};
    benchmark::DoNotOptimize(mm::mm_step_tx(state.layout, coeffs));
  }
}

void bm_outer_iteration_centralized(benchmark::State& bench) {
  const Scenario scenario = spec_for(static_cast<int>(bench.range(0))).sample(0);
  const auto layout = layout::build(scenario, true, true);
  solver::SolverConfig config;
  config.max_outer = 2;
  config.beamformer = solver::BeamformerUpdate::InverseFree;
  config.mirror_decentralized = true;
  for (auto _ : bench) {
    auto report = solver::solve(scenario, layout, config);
    benchmark::DoNotOptimize(report.iterations);
  }
}

void bm_outer_iteration_decentralized(benchmark::State& bench) {
  const Scenario scenario = spec_for(static_cast<int>(bench.range(0))).sample(0);
  const auto layout = layout::build(scenario, true, true);
  dbp::DecConfig config;
  config.clusters = 4;
  config.solver.max_outer = 2;
  config.solver.beamformer = solver::BeamformerUpdate::InverseFree;
  config.solver.mirror_decentralized = true;
  for (auto _ : bench) {
    auto report = dbp::dec_solve(scenario, layout, config);
    benchmark::DoNotOptimize(report.report.iterations);
  }
}

}  // namespace

BENCHMARK(bm_beamformer_bisection)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_beamformer_inverse_free)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_tx_surrogate_step)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_outer_iteration_centralized)
    ->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_outer_iteration_decentralized)
    ->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
