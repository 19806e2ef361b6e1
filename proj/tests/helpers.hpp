// Shared fixtures for the unit and acceptance tests: a small deterministic
// scenario family, a generic feasible solver state seeded away from symmetric
// points, and objective re-evaluation at displaced layouts.

#pragma once

#include <cmath>
#include <random>

#include "fawsr/channel.hpp"
#include "fawsr/harness.hpp"
#include "fawsr/objective.hpp"
#include "fawsr/solver.hpp"

namespace fawsr::testing {

inline harness::ScenarioSpec small_spec(std::uint64_t seed) {
  harness::ScenarioSpec spec;
  spec.num_tx = 4;
  spec.num_rx = 2;
  spec.num_users = 2;
  spec.num_streams = 2;
  spec.num_clusters = 2;
  spec.num_paths = 3;
  spec.seed = seed;
  return spec;
}

/// Feasible state with a random beamformer at 30-100% of the power budget and
/// auxiliaries refreshed to match; avoids the symmetric identity-pattern start.
inline solver::SolverState seeded_state(const Scenario& scenario,
                                        std::mt19937_64& rng) {
  auto layout = layout::build(scenario, true, true);
  auto state = solver::initialize(scenario, layout);
  std::normal_distribution<double> n(0.0, 1.0);
  double power = 0;
  for (auto& w : state.beams.W) {
    for (int r = 0; r < w.rows(); ++r)
      for (int c = 0; c < w.cols(); ++c) w(r, c) = Complex(n(rng), n(rng));
    power += w.squaredNorm();
  }
  std::uniform_real_distribution<double> frac(0.3, 1.0);
  const double scale = std::sqrt(frac(rng) * scenario.power_budget / power);
  for (auto& w : state.beams.W) w *= scale;
  solver::update_auxiliaries(state);
  return state;
}

inline double fq(const solver::SolverState& state) {
  return objective::f_quad(state.channels, state.beams, state.aux.gamma,
                           state.aux.phi);
}

inline double fq_at_tx(const Scenario& scenario, const solver::SolverState& base,
                       const Positions& tx) {
  solver::SolverState state = base;
  state.layout.tx = tx;
  channel::update_tx_side(scenario.geometry, state.layout, state.channels);
  return fq(state);
}

inline double fq_at_rx(const Scenario& scenario, const solver::SolverState& base,
                       int k, const Positions& rx) {
  solver::SolverState state = base;
  state.layout.rx[k] = rx;
  channel::update_rx_side(scenario.geometry, state.layout, k, state.channels);
  return fq(state);
}

inline Positions random_positions_in_boxes(const std::vector<Box>& boxes,
                                           std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Positions out(static_cast<int>(boxes.size()), 3);
  for (size_t i = 0; i < boxes.size(); ++i)
    for (int a = 0; a < 3; ++a)
      out(static_cast<int>(i), a) =
          boxes[i].lo[a] + u(rng) * (boxes[i].hi[a] - boxes[i].lo[a]);
  return out;
}

}  // namespace fawsr::testing
