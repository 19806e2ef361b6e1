#pragma once

#include "fawsr/types.hpp"

namespace fawsr::objective {

constexpr double kNatsPerBit = 0.6931471805599453;  // ln 2

inline double nats_to_bits(double nats) { return nats / kNatsPerBit; }

/// Interference-plus-noise matrix M_k = sum_{j != k} H_k W_j W_j^H H_k^H + sigma_k^2 I.
Mat interference_matrix(const ChannelSet& channels, const BeamformerSet& beams, int k);

/// Weighted sum rate in nats: sum_k alpha_k logdet(I + W_k^H H_k^H M_k^{-1} H_k W_k).
double wsr(const ChannelSet& channels, const BeamformerSet& beams);

/// Lagrangian-dual-transform objective over (W, T, R, Gamma).
double f_lag(const ChannelSet& channels, const BeamformerSet& beams,
             const std::vector<Mat>& gamma);

/// Quadratic-transform objective over (W, T, R, Gamma, Phi).
double f_quad(const ChannelSet& channels, const BeamformerSet& beams,
              const std::vector<Mat>& gamma, const std::vector<Mat>& phi);

/// Finite ceiling on the WSR for any feasible point, scaled to the actual
/// path-response energy of each user.
double r_max_bound(const SystemDims& dims, const std::vector<PathGeometry>& geometry,
                   const BeamformerSet& beams);

}  // namespace fawsr::objective
