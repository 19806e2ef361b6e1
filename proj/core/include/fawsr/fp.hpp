#pragma once

#include "fawsr/types.hpp"

namespace fawsr::fp {

/// Closed-form optimum of the quadratic-transform auxiliary Phi_k.
Mat update_phi(const ChannelSet& channels, const BeamformerSet& beams, int k);

/// Closed-form optimum of the Lagrangian-dual auxiliary Gamma_k (Hermitian PSD).
Mat update_gamma(const ChannelSet& channels, const BeamformerSet& beams, int k);

struct BisectionResult {
  std::vector<Mat> W;
  double mu = 0.0;       // power Lagrange multiplier
  int iterations = 0;    // bisection steps taken
};

/// Beamformer block update with the power multiplier found by bisection.
/// On return either mu == 0 and power <= P_max, or power is in
/// [P_max * (1 - power_tol), P_max] (complementary slackness).
BisectionResult update_w_bisection(const ChannelSet& channels,
                                   const std::vector<Mat>& gamma,
                                   const std::vector<Mat>& phi,
                                   const RealVec& weights, double power_budget,
                                   double power_tol = 1e-6, int max_iter = 100);

/// Diagonal-majorizer scale eta = || sum_j H_j^H Phi_j (I+Gamma_j) Phi_j^H H_j ||_F.
double nonhomogeneous_eta(const ChannelSet& channels, const std::vector<Mat>& gamma,
                          const std::vector<Mat>& phi);

/// Nesterov extrapolation weight for BCA iteration i (1-based).
inline double extrapolation_weight(int iteration) {
  return std::max((iteration - 2.0) / (iteration + 1.0), 0.0);
}

/// Inverse-free beamformer update with Nesterov extrapolation. `aux` supplies
/// eta and the two-step memory; W in `beams` holds the current iterate.
std::vector<Mat> update_w_inverse_free(const ChannelSet& channels,
                                       const std::vector<Mat>& gamma,
                                       const std::vector<Mat>& phi,
                                       const AuxiliaryState& aux,
                                       const RealVec& weights, int iteration,
                                       double power_budget);

}  // namespace fawsr::fp
