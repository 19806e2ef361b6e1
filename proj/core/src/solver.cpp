#include "fawsr/solver.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fawsr/channel.hpp"
#include "fawsr/fp.hpp"
#include "fawsr/objective.hpp"

namespace fawsr::solver {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

void SolverConfig::validate() const {
  if (max_outer < 1 || bisection_max_iter < 1 || mm.max_iter < 1 || position_steps < 1)
    throw std::invalid_argument("solver config: iteration counts must be >= 1");
  if (tol_outer <= 0 || bisection_tol <= 0 || mm.tol <= 0)
    throw std::invalid_argument("solver config: tolerances must be positive");
  if (mirror_decentralized && beamformer != BeamformerUpdate::InverseFree)
    throw std::invalid_argument(
        "solver config: decentralized mirror requires the inverse-free beamformer");
}

double SolverReport::final_wsr_bits() const {
  return wsr_nats.empty() ? 0.0 : objective::nats_to_bits(wsr_nats.back());
}

std::string SolverReport::to_json() const {
  nlohmann::json j;
  j["iterations"] = iterations;
  j["converged"] = converged;
  j["final_wsr_bits"] = final_wsr_bits();
  j["final_wsr_nats"] = wsr_nats.empty() ? 0.0 : wsr_nats.back();
  j["r_max_nats"] = r_max_nats;
  j["total_ms"] = total_ms;
  j["wsr_nats"] = wsr_nats;
  j["f_quad"] = f_quad;
  nlohmann::json t = nlohmann::json::array();
  for (const auto& b : times)
    t.push_back({{"aux_ms", b.aux_ms}, {"w_ms", b.w_ms}, {"tx_ms", b.tx_ms}, {"rx_ms", b.rx_ms}});
  j["block_times"] = t;
  j["total_power"] = final_state.beams.total_power();
  return j.dump(2);
}

void SolverReport::write_json(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report: " + path.string());
  out << to_json() << '\n';
}

void SolverReport::write_trace_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace: " + path.string());
  out << "iteration,wsr_bits,f_quad,aux_ms,w_ms,tx_ms,rx_ms\n";
  out.precision(17);
  for (size_t i = 1; i < wsr_nats.size(); ++i) {
    const auto& b = times[i - 1];
    out << i << ',' << objective::nats_to_bits(wsr_nats[i]) << ',' << f_quad[i - 1] << ','
        << b.aux_ms << ',' << b.w_ms << ',' << b.tx_ms << ',' << b.rx_ms << '\n';
  }
}

SolverState initialize(const Scenario& scenario, const AntennaLayout& layout) {
  scenario.validate();
  const auto& dims = scenario.dims;
  if (layout.tx.rows() != dims.num_tx ||
      static_cast<int>(layout.rx.size()) != dims.num_users)
    throw std::invalid_argument("initialize: layout does not match scenario dims");

  SolverState state;
  state.layout = layout;
  state.channels = channel::assemble_channels(scenario.geometry, state.layout);

  state.beams.power_budget = scenario.power_budget;
  state.beams.weights = scenario.weights;
  state.beams.noise = scenario.noise;
  const double amp = std::sqrt(scenario.power_budget /
                               (dims.num_users * dims.num_streams));
  state.beams.W.assign(dims.num_users, Mat::Zero(dims.num_tx, dims.num_streams));
  for (auto& w : state.beams.W)
    for (int s = 0; s < dims.num_streams; ++s) w(s, s) = amp;

  state.aux.gamma.resize(dims.num_users);
  state.aux.phi.resize(dims.num_users);
  update_auxiliaries(state);
  state.aux.w_prev = state.beams.W;
  state.aux.w_prev2 = state.beams.W;
  state.aux.eta = fp::nonhomogeneous_eta(state.channels, state.aux.gamma, state.aux.phi);
  return state;
}

void update_auxiliaries(SolverState& state) {
  const int users = static_cast<int>(state.channels.H.size());
  for (int k = 0; k < users; ++k) {
    state.aux.phi[k] = fp::update_phi(state.channels, state.beams, k);
    state.aux.gamma[k] = fp::update_gamma(state.channels, state.beams, k);
  }
}

SolverReport solve(const Scenario& scenario, const AntennaLayout& layout,
                   const SolverConfig& config) {
  config.validate();
  const auto run_start = Clock::now();
  SolverState state = initialize(scenario, layout);

  SolverReport report;
  report.r_max_nats =
      objective::r_max_bound(scenario.dims, scenario.geometry, state.beams);
  report.wsr_nats.push_back(objective::wsr(state.channels, state.beams));

  const bool accelerate = config.accelerate && !config.mirror_decentralized;
  Positions tx_snapshot = state.layout.tx;
  std::vector<Positions> rx_snapshot = state.layout.rx;
  std::vector<Mat> w_snapshot = state.beams.W;

  for (int iter = 1; iter <= config.max_outer; ++iter) {
    BlockTimes bt;

    auto t0 = Clock::now();
    update_auxiliaries(state);
    bt.aux_ms = elapsed_ms(t0);
    report.f_quad.push_back(
        objective::f_quad(state.channels, state.beams, state.aux.gamma, state.aux.phi));

    t0 = Clock::now();
    double mu = 0.0;
    if (config.beamformer == BeamformerUpdate::Bisection) {
      auto result = fp::update_w_bisection(state.channels, state.aux.gamma,
                                           state.aux.phi, state.beams.weights,
                                           state.beams.power_budget,
                                           config.bisection_tol,
                                           config.bisection_max_iter);
      state.beams.W = std::move(result.W);
      mu = result.mu;
    } else {
      state.aux.eta =
          fp::nonhomogeneous_eta(state.channels, state.aux.gamma, state.aux.phi);
      if (state.aux.eta > 0) {
        auto next = fp::update_w_inverse_free(state.channels, state.aux.gamma,
                                              state.aux.phi, state.aux,
                                              state.beams.weights, iter,
                                              state.beams.power_budget);
        state.aux.w_prev2 = state.aux.w_prev;
        state.aux.w_prev = next;
        state.beams.W = std::move(next);
      }
    }
    bt.w_ms = elapsed_ms(t0);

    t0 = Clock::now();
    if (config.optimize_tx) {
      if (config.mirror_decentralized) {
        for (int step = 0; step < config.position_steps; ++step) {
          const auto deriv = mm::tx_derivatives(state.channels, state.beams,
                                                state.aux.gamma, state.aux.phi,
                                                scenario.geometry);
          const double delta = mm::delta_tx_loose(deriv, state.beams, state.aux.gamma,
                                                  state.aux.phi, state.channels,
                                                  scenario.geometry);
          if (delta <= 0) break;
          mm::SurrogateCoeffs coeffs{
              mm::grad_tx(deriv, scenario.geometry, state.layout), delta};
          state.layout.tx = mm::mm_step_tx(state.layout, coeffs);
          channel::update_tx_side(scenario.geometry, state.layout, state.channels);
        }
      } else {
        mm::mm_loop_tx(scenario.geometry, state.layout, state.channels, state.beams,
                       state.aux.gamma, state.aux.phi, config.mm);
      }
    }
    bt.tx_ms = elapsed_ms(t0);

    t0 = Clock::now();
    if (config.optimize_rx) {
      for (int k = 0; k < scenario.dims.num_users; ++k) {
        if (config.mirror_decentralized) {
          for (int step = 0; step < config.position_steps; ++step) {
            const double delta = mm::delta_rx(state.channels, state.beams,
                                              state.aux.gamma, state.aux.phi,
                                              scenario.geometry, k);
            if (delta <= 0) break;
            const Mat d_rx = mm::rx_derivative(state.channels, state.beams,
                                               state.aux.gamma, state.aux.phi,
                                               scenario.geometry, k);
            mm::SurrogateCoeffs coeffs{
                mm::grad_rx(d_rx, scenario.geometry, state.layout, k), delta};
            state.layout.rx[k] = mm::mm_step_rx(state.layout, coeffs, k);
            channel::update_rx_side(scenario.geometry, state.layout, k, state.channels);
          }
        } else {
          mm::mm_loop_rx(scenario.geometry, state.layout, state.channels, state.beams,
                         state.aux.gamma, state.aux.phi, k, config.mm);
        }
      }
    }
    bt.rx_ms = elapsed_ms(t0);

    double wsr = objective::wsr(state.channels, state.beams);

    if (accelerate && iter >= 2) {
      for (double stretch : {16.0, 8.0, 4.0, 2.0, 1.0}) {
        SolverState cand = state;
        cand.layout.tx += stretch * (state.layout.tx - tx_snapshot);
        for (int m = 0; m < cand.layout.tx.rows(); ++m)
          cand.layout.tx.row(m) =
              cand.layout.tx_boxes[m].clamp(cand.layout.tx.row(m).transpose()).transpose();
        for (size_t k = 0; k < cand.layout.rx.size(); ++k) {
          cand.layout.rx[k] += stretch * (state.layout.rx[k] - rx_snapshot[k]);
          for (int n = 0; n < cand.layout.rx[k].rows(); ++n)
            cand.layout.rx[k].row(n) = cand.layout.rx_boxes[k][n]
                                           .clamp(cand.layout.rx[k].row(n).transpose())
                                           .transpose();
        }
        for (size_t k = 0; k < cand.beams.W.size(); ++k)
          cand.beams.W[k] += stretch * (state.beams.W[k] - w_snapshot[k]);
        // Preserve the block update's transmit power so the multiplier
        // contract is untouched by the extrapolation.
        const double target = state.beams.total_power();
        const double actual = cand.beams.total_power();
        if (actual <= 0) continue;
        const double rescale = std::sqrt(target / actual);
        for (auto& w : cand.beams.W) w *= rescale;
        cand.channels = channel::assemble_channels(scenario.geometry, cand.layout);
        const double wsr_cand = objective::wsr(cand.channels, cand.beams);
        if (wsr_cand > wsr) {
          state = std::move(cand);
          wsr = wsr_cand;
          break;
        }
      }
    }
    tx_snapshot = state.layout.tx;
    rx_snapshot = state.layout.rx;
    w_snapshot = state.beams.W;

    if (config.check_r_max && wsr > report.r_max_nats * (1.0 + 1e-9))
      throw NumericalFailure("solve: weighted sum rate exceeded its upper bound at iteration " +
                             std::to_string(iter));
    report.wsr_nats.push_back(wsr);
    report.mu.push_back(mu);
    report.power.push_back(state.beams.total_power());
    report.times.push_back(bt);
    report.iterations = iter;

    const double prev = report.wsr_nats[report.wsr_nats.size() - 2];
    if (std::abs(wsr - prev) < config.tol_outer * (1.0 + std::abs(prev))) {
      report.converged = true;
      break;
    }
  }

  report.total_ms = elapsed_ms(run_start);
  report.final_state = std::move(state);
  return report;
}

}  // namespace fawsr::solver
