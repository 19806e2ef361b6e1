#pragma once

#include <filesystem>

#include "fawsr/mm.hpp"
#include "fawsr/scenario_io.hpp"

namespace fawsr::solver {

enum class BeamformerUpdate { Bisection, InverseFree };

struct SolverConfig {
  int max_outer = 80;
  double tol_outer = 1e-4;     // relative WSR change
  mm::MmLoopConfig mm;         // inner position loops
  double bisection_tol = 1e-6;
  int bisection_max_iter = 100;
  bool optimize_tx = true;
  bool optimize_rx = true;
  BeamformerUpdate beamformer = BeamformerUpdate::Bisection;
  bool check_r_max = true;

  // Safeguarded over-relaxation: after the four blocks, extrapolate
  // (W, T, R) along the last iterate difference, project back to the
  // feasible set, and keep the point only if the WSR improves. Cuts the
  // slow two-block crawl between W and T without giving up monotone
  // ascent. Ignored in mirror mode (the decentralized fabric has no
  // counterpart step).
  bool accelerate = true;

  // Restrict per-iteration work to what the decentralized fabric performs:
  // `position_steps` surrogate steps per side (no inner convergence loop) and
  // the loosened transmit curvature bound. Requires the inverse-free
  // beamformer. Used by the degenerate-sharding equivalence checks.
  bool mirror_decentralized = false;
  int position_steps = 1;

  void validate() const;
};

struct SolverState {
  AntennaLayout layout;
  ChannelSet channels;
  BeamformerSet beams;
  AuxiliaryState aux;
};

struct BlockTimes {
  double aux_ms = 0, w_ms = 0, tx_ms = 0, rx_ms = 0;
};

struct SolverReport {
  std::vector<double> wsr_nats;    // entry 0 = initial point, then per iteration
  std::vector<double> f_quad;      // after the auxiliary block, per iteration
  std::vector<double> mu;          // bisection multiplier (0 when inverse-free)
  std::vector<double> power;       // transmit power at iteration end
  std::vector<BlockTimes> times;   // per iteration
  int iterations = 0;
  bool converged = false;
  double r_max_nats = 0.0;
  double total_ms = 0.0;
  SolverState final_state;

  double final_wsr_bits() const;
  std::string to_json() const;
  void write_trace_csv(const std::filesystem::path& path) const;
  void write_json(const std::filesystem::path& path) const;
};

/// Feasible starting point: antennas at box centers, equal-power identity-
/// pattern beamformers, auxiliaries from one closed-form update.
SolverState initialize(const Scenario& scenario, const AntennaLayout& layout);

/// One pass of the auxiliary block (Phi then Gamma for every user).
void update_auxiliaries(SolverState& state);

/// Full centralized block-coordinate ascent run.
SolverReport solve(const Scenario& scenario, const AntennaLayout& layout,
                   const SolverConfig& config);

}  // namespace fawsr::solver
