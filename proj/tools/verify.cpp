#include "verify.hpp"

#include <cmath>
#include <random>

#include "fawsr/channel.hpp"
#include "fawsr/dbp.hpp"
#include "fawsr/fp.hpp"
#include "fawsr/harness.hpp"
#include "fawsr/mm.hpp"
#include "fawsr/objective.hpp"

namespace fawsr::verify {

namespace {

harness::ScenarioSpec small_spec(std::uint64_t seed) {
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

solver::SolverState seeded_state(const Scenario& scenario, std::mt19937_64& rng) {
  auto layout = layout::build(scenario, true, true);
  auto state = solver::initialize(scenario, layout);
  // Replace the identity-pattern start with a generic feasible beamformer so
  // the derivative checks do not sit at a symmetric point.
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

double fq(const solver::SolverState& state) {
  return objective::f_quad(state.channels, state.beams, state.aux.gamma,
                           state.aux.phi);
}

double fq_at_tx(const Scenario& scenario, const solver::SolverState& base,
                const Positions& tx) {
  solver::SolverState state = base;
  state.layout.tx = tx;
  channel::update_tx_side(scenario.geometry, state.layout, state.channels);
  return fq(state);
}

double fq_at_rx(const Scenario& scenario, const solver::SolverState& base, int k,
                const Positions& rx) {
  solver::SolverState state = base;
  state.layout.rx[k] = rx;
  channel::update_rx_side(scenario.geometry, state.layout, k, state.channels);
  return fq(state);
}

// Maximum normalized disagreement between an analytic gradient block and its
// central finite difference, relative to the largest gradient magnitude.
double fd_error_tx(const Scenario& scenario, const solver::SolverState& state) {
  const auto deriv = mm::tx_derivatives(state.channels, state.beams,
                                        state.aux.gamma, state.aux.phi,
                                        scenario.geometry);
  const Positions grad = mm::grad_tx(deriv, scenario.geometry, state.layout);
  const double h = 1e-6 * scenario.wavelength;
  const double floor = std::max(grad.cwiseAbs().maxCoeff(), 1e-8);
  double worst = 0;
  for (int m = 0; m < grad.rows(); ++m)
    for (int a = 0; a < 3; ++a) {
      Positions plus = state.layout.tx, minus = state.layout.tx;
      plus(m, a) += h;
      minus(m, a) -= h;
      const double fd =
          (fq_at_tx(scenario, state, plus) - fq_at_tx(scenario, state, minus)) /
          (2 * h);
      worst = std::max(worst, std::abs(fd - grad(m, a)) / floor);
    }
  return worst;
}

double fd_error_rx(const Scenario& scenario, const solver::SolverState& state, int k) {
  const Mat d_rx = mm::rx_derivative(state.channels, state.beams, state.aux.gamma,
                                     state.aux.phi, scenario.geometry, k);
  const Positions grad = mm::grad_rx(d_rx, scenario.geometry, state.layout, k);
  const double h = 1e-6 * scenario.wavelength;
  const double floor = std::max(grad.cwiseAbs().maxCoeff(), 1e-8);
  double worst = 0;
  for (int n = 0; n < grad.rows(); ++n)
    for (int a = 0; a < 3; ++a) {
      Positions plus = state.layout.rx[k], minus = state.layout.rx[k];
      plus(n, a) += h;
      minus(n, a) -= h;
      const double fd =
          (fq_at_rx(scenario, state, k, plus) - fq_at_rx(scenario, state, k, minus)) /
          (2 * h);
      worst = std::max(worst, std::abs(fd - grad(n, a)) / floor);
    }
  return worst;
}

Positions random_tx_in_boxes(const AntennaLayout& layout, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Positions tx = layout.tx;
  for (int m = 0; m < tx.rows(); ++m)
    for (int a = 0; a < 3; ++a) {
      const auto& box = layout.tx_boxes[m];
      tx(m, a) = box.lo[a] + u(rng) * (box.hi[a] - box.lo[a]);
    }
  return tx;
}

SuiteResult grad_suite(bool tx_side, std::uint64_t seed) {
  const auto spec = small_spec(seed);
  double worst = 0;
  for (int i = 0; i < 20; ++i) {
    const Scenario scenario = spec.sample(i);
    auto rng = harness::rng_stream(seed, i, 0xbead5u);
    const auto state = seeded_state(scenario, rng);
    if (tx_side) {
      worst = std::max(worst, fd_error_tx(scenario, state));
    } else {
      for (int k = 0; k < scenario.dims.num_users; ++k)
        worst = std::max(worst, fd_error_rx(scenario, state, k));
    }
  }
  SuiteResult r;
  r.name = tx_side ? "grad-tx" : "grad-rx";
  r.margin = worst;
  r.passed = worst <= 1e-5;
  r.description = "max normalized finite-difference error";
  return r;
}

SuiteResult majorization_suite(std::uint64_t seed) {
  const auto spec = small_spec(seed);
  double worst_slack = 0;  // most negative (surrogate above objective) seen
  for (int i = 0; i < 5; ++i) {
    const Scenario scenario = spec.sample(i);
    auto rng = harness::rng_stream(seed, i, 0xab0de5u);
    const auto state = seeded_state(scenario, rng);
    const auto deriv = mm::tx_derivatives(state.channels, state.beams,
                                          state.aux.gamma, state.aux.phi,
                                          scenario.geometry);
    const Positions grad = mm::grad_tx(deriv, scenario.geometry, state.layout);
    const double delta = mm::delta_tx(deriv, state.beams, state.aux.gamma,
                                      state.aux.phi, state.channels,
                                      scenario.geometry);
    const double f0 = fq(state);
    const double scale = 1.0 + std::abs(f0);
    for (int trial = 0; trial < 100; ++trial) {
      const Positions cand = random_tx_in_boxes(state.layout, rng);
      const Positions step = cand - state.layout.tx;
      double surrogate = f0 - 0.5 * delta * step.squaredNorm();
      surrogate += (grad.array() * step.array()).sum();
      const double actual = fq_at_tx(scenario, state, cand);
      worst_slack = std::min(worst_slack, (actual - surrogate) / scale);
    }
  }
  SuiteResult r;
  r.name = "majorization";
  r.margin = worst_slack;
  r.passed = worst_slack >= -1e-9;
  r.description = "min relative slack (objective - surrogate)";
  return r;
}

SuiteResult delta_suite(std::uint64_t seed) {
  const auto spec = small_spec(seed);
  double worst = std::numeric_limits<double>::infinity();  // min of delta + curvature
  for (int i = 0; i < 20; ++i) {
    const Scenario scenario = spec.sample(i);
    auto rng = harness::rng_stream(seed, i, 0xde17a5u);
    auto state = seeded_state(scenario, rng);
    state.layout.tx = random_tx_in_boxes(state.layout, rng);
    channel::update_tx_side(scenario.geometry, state.layout, state.channels);

    const auto deriv = mm::tx_derivatives(state.channels, state.beams,
                                          state.aux.gamma, state.aux.phi,
                                          scenario.geometry);
    const double delta = mm::delta_tx(deriv, state.beams, state.aux.gamma,
                                      state.aux.phi, state.channels,
                                      scenario.geometry);
    const double loose = mm::delta_tx_loose(deriv, state.beams, state.aux.gamma,
                                            state.aux.phi, state.channels,
                                            scenario.geometry);
    if (loose < delta * (1.0 - 1e-12)) {
      worst = -1;
      break;
    }
    // Directional second differences must never exceed delta in magnitude
    // from below (Hessian >= -delta I).
    std::normal_distribution<double> n(0.0, 1.0);
    const double h = 1e-4 * scenario.wavelength;
    const double f0 = fq(state);
    for (int trial = 0; trial < 8; ++trial) {
      Positions dir(state.layout.tx.rows(), 3);
      for (int m = 0; m < dir.rows(); ++m)
        for (int a = 0; a < 3; ++a) dir(m, a) = n(rng);
      dir /= dir.norm();
      const double fp = fq_at_tx(scenario, state, state.layout.tx + h * dir);
      const double fm = fq_at_tx(scenario, state, state.layout.tx - h * dir);
      const double curvature = (fp - 2 * f0 + fm) / (h * h);
      worst = std::min(worst, delta + curvature);
    }
  }
  SuiteResult r;
  r.name = "delta";
  r.margin = worst;
  r.passed = worst >= -1e-6;
  r.description = "min (delta + directional FD curvature); negative on loose<exact";
  return r;
}

SuiteResult tightness_suite(std::uint64_t seed) {
  const auto spec = small_spec(seed);
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    const Scenario scenario = spec.sample(i);
    auto rng = harness::rng_stream(seed, i, 0x7164175u);
    const auto state = seeded_state(scenario, rng);
    const double r_val = objective::wsr(state.channels, state.beams);
    const double lag = objective::f_lag(state.channels, state.beams, state.aux.gamma);
    const double quad = fq(state);
    const double scale = 1.0 + std::abs(r_val);
    worst = std::max(worst, std::abs(quad - lag) / scale);
    worst = std::max(worst, std::abs(lag - r_val) / scale);
  }
  SuiteResult r;
  r.name = "tightness";
  r.margin = worst;
  r.passed = worst <= 1e-8;
  r.description = "max relative gap across the transform chain";
  return r;
}

SuiteResult mul_suite(std::uint64_t seed) {
  std::mt19937_64 rng(seed + 77);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_int_distribution<int> pick_c(1, 8);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int clusters = pick_c(rng);
    const int rows = clusters * pick_c(rng);
    const int ca = pick_c(rng), cb = pick_c(rng);
    Mat a(rows, ca), b(rows, cb);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < ca; ++c) a(r, c) = Complex(n(rng), n(rng));
      for (int c = 0; c < cb; ++c) b(r, c) = Complex(n(rng), n(rng));
    }
    const auto plan = dbp::ClusterPlan::contiguous(rows, clusters);
    const Mat dist = dbp::mul_reduce(dbp::shard_rows(a, plan), dbp::shard_rows(b, plan));
    const Mat direct = a.adjoint() * b;
    worst = std::max(worst, (dist - direct).norm() / std::max(direct.norm(), 1.0));
  }
  SuiteResult r;
  r.name = "mul";
  r.margin = worst;
  r.passed = worst <= 1e-12;
  r.description = "max relative error of the sharded inner product";
  return r;
}

}  // namespace

std::vector<std::string> suite_names() {
  return {"grad-tx", "grad-rx", "majorization", "delta", "tightness", "mul"};
}

SuiteResult run_suite(const std::string& name, std::uint64_t seed) {
  if (name == "grad-tx") return grad_suite(true, seed);
  if (name == "grad-rx") return grad_suite(false, seed);
  if (name == "majorization") return majorization_suite(seed);
  if (name == "delta") return delta_suite(seed);
  if (name == "tightness") return tightness_suite(seed);
  if (name == "mul") return mul_suite(seed);
  throw std::invalid_argument("unknown suite: " + name);
}

}  // namespace fawsr::verify
