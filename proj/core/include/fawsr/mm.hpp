#pragma once

#include "fawsr/types.hpp"

namespace fawsr::mm {

/// Quadratic surrogate data at an expansion layout: gradient blocks (one
/// 3-vector per antenna) and the curvature constant delta.
struct SurrogateCoeffs {
  Positions grad;      // M x 3 (transmit) or N x 3 (receive)
  double delta = 0.0;  // global curvature bound, position-independent
};

/// Chain-rule derivative of f_quad w.r.t. the transmit FRM G_k, transposed
/// (M x L_tx), plus the shared aggregates it is built from.
struct TxDerivatives {
  std::vector<Mat> D;          // per user, M x L_tx
  Mat w_hat;                   // sum_k W_k W_k^H, M x M
  std::vector<Mat> sigma_hat;  // per user, Sigma^H F Phi (I+Gamma) Phi^H F^H Sigma
};

TxDerivatives tx_derivatives(const ChannelSet& channels, const BeamformerSet& beams,
                             const std::vector<Mat>& gamma, const std::vector<Mat>& phi,
                             const std::vector<PathGeometry>& geometry);

/// Gradient of f_quad w.r.t. the transmit positions, one row per antenna.
Positions grad_tx(const TxDerivatives& deriv, const std::vector<PathGeometry>& geometry,
                  const AntennaLayout& layout);

/// Curvature bound for the transmit surrogate (independent of T).
double delta_tx(const TxDerivatives& deriv, const BeamformerSet& beams,
                const std::vector<Mat>& gamma, const std::vector<Mat>& phi,
                const ChannelSet& channels, const std::vector<PathGeometry>& geometry);

/// Loosened transmit curvature bound: the absolute row sum of W_hat is
/// replaced by a triangle/Cauchy-Schwarz product of per-user row norms so the
/// bound decomposes over row blocks. Always >= delta_tx.
double delta_tx_loose(const TxDerivatives& deriv, const BeamformerSet& beams,
                      const std::vector<Mat>& gamma, const std::vector<Mat>& phi,
                      const ChannelSet& channels,
                      const std::vector<PathGeometry>& geometry);

/// One projected surrogate-maximization step: T + grad/delta, clamped per box.
Positions mm_step_tx(const AntennaLayout& layout, const SurrogateCoeffs& coeffs);

/// Receive-side analogues, per user k.
Mat rx_derivative(const ChannelSet& channels, const BeamformerSet& beams,
                  const std::vector<Mat>& gamma, const std::vector<Mat>& phi,
                  const std::vector<PathGeometry>& geometry, int k);
Positions grad_rx(const Mat& d_rx, const std::vector<PathGeometry>& geometry,
                  const AntennaLayout& layout, int k);
double delta_rx(const ChannelSet& channels, const BeamformerSet& beams,
                const std::vector<Mat>& gamma, const std::vector<Mat>& phi,
                const std::vector<PathGeometry>& geometry, int k);
Positions mm_step_rx(const AntennaLayout& layout, const SurrogateCoeffs& coeffs, int k);

struct MmLoopConfig {
  double tol = 1e-7;  // relative f_quad improvement
  int max_iter = 500;
};

/// Iterate {gradient, step, project} on the transmit side until f_quad
/// stalls. Updates layout.tx and the transmit factors of `channels` in place;
/// returns the per-iteration f_quad trace (first entry is the initial value).
std::vector<double> mm_loop_tx(const std::vector<PathGeometry>& geometry,
                               AntennaLayout& layout, ChannelSet& channels,
                               const BeamformerSet& beams, const std::vector<Mat>& gamma,
                               const std::vector<Mat>& phi, const MmLoopConfig& config);

/// Same loop for user k's receive positions.
std::vector<double> mm_loop_rx(const std::vector<PathGeometry>& geometry,
                               AntennaLayout& layout, ChannelSet& channels,
                               const BeamformerSet& beams, const std::vector<Mat>& gamma,
                               const std::vector<Mat>& phi, int k,
                               const MmLoopConfig& config);

struct SeparationReport {
  bool ok = true;
  std::vector<std::pair<int, int>> violations;
};

/// Linearized pairwise-spacing check of the candidate positions against the
/// anchor layout (diagnostic under the box movement mode).
SeparationReport linearized_separation_check(const Positions& candidate,
                                             const Positions& anchor, double min_sep);

}  // namespace fawsr::mm
