#include "fawsr/fp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>

namespace fawsr::fp {

namespace {

// sum_j H_j^H Phi_j (I + Gamma_j) Phi_j^H H_j, the shared quadratic coefficient
// of the beamformer subproblem.
Mat beamformer_quadratic(const ChannelSet& channels, const std::vector<Mat>& gamma,
                         const std::vector<Mat>& phi) {
  const int m = static_cast<int>(channels.H[0].cols());
  const int d = static_cast<int>(gamma[0].rows());
  Mat b = Mat::Zero(m, m);
  for (size_t j = 0; j < channels.H.size(); ++j) {
    const Mat hp = channels.H[j].adjoint() * phi[j];  // M x d
    b += hp * (Mat::Identity(d, d) + gamma[j]) * hp.adjoint();
  }
  return hermitize(b);
}

std::vector<Mat> linear_terms(const ChannelSet& channels, const std::vector<Mat>& gamma,
                              const std::vector<Mat>& phi, const RealVec& weights) {
  const int d = static_cast<int>(gamma[0].rows());
  std::vector<Mat> rhs(channels.H.size());
  for (size_t k = 0; k < channels.H.size(); ++k)
    rhs[k] = std::sqrt(weights[k]) * channels.H[k].adjoint() * phi[k] *
             (Mat::Identity(d, d) + gamma[k]);
  return rhs;
}

}  // namespace

Mat update_phi(const ChannelSet& channels, const BeamformerSet& beams, int k) {
  const int n = static_cast<int>(channels.H[k].rows());
  Mat total = beams.noise[k] * Mat::Identity(n, n);
  for (size_t j = 0; j < beams.W.size(); ++j) {
    const Mat hw = channels.H[k] * beams.W[j];
    total += hw * hw.adjoint();
  }
  Eigen::LLT<Mat> llt(hermitize(total));
  if (llt.info() != Eigen::Success)
    throw NumericalFailure("update_phi: singular total-receive matrix");
  return std::sqrt(beams.weights[k]) * llt.solve(channels.H[k] * beams.W[k]);
}

Mat update_gamma(const ChannelSet& channels, const BeamformerSet& beams, int k) {
  const int n = static_cast<int>(channels.H[k].rows());
  Mat m = beams.noise[k] * Mat::Identity(n, n);
  for (size_t j = 0; j < beams.W.size(); ++j) {
    if (static_cast<int>(j) == k) continue;
    const Mat hw = channels.H[k] * beams.W[j];
    m += hw * hw.adjoint();
  }
  Eigen::LLT<Mat> llt(hermitize(m));
  if (llt.info() != Eigen::Success)
    throw NumericalFailure("update_gamma: singular interference matrix");
  const Mat hw = channels.H[k] * beams.W[k];
  return hermitize(hw.adjoint() * llt.solve(hw));
}

BisectionResult update_w_bisection(const ChannelSet& channels,
                                   const std::vector<Mat>& gamma,
                                   const std::vector<Mat>& phi,
                                   const RealVec& weights, double power_budget,
                                   double power_tol, int max_iter) {
  const int m = static_cast<int>(channels.H[0].cols());
  const Mat quad = beamformer_quadratic(channels, gamma, phi);
  const std::vector<Mat> rhs = linear_terms(channels, gamma, phi, weights);

  const auto solve_at = [&](double mu) {
    std::vector<Mat> w(rhs.size());
    if (mu > 0) {
      Eigen::LLT<Mat> llt(quad + mu * Mat::Identity(m, m));
      if (llt.info() != Eigen::Success)
        throw NumericalFailure("update_w_bisection: shifted solve failed");
      for (size_t k = 0; k < rhs.size(); ++k) w[k] = llt.solve(rhs[k]);
    } else {
      // quad can be rank-deficient at mu = 0; the rhs lies in its range, so the
      // minimum-norm solution is well defined.
      Eigen::SelfAdjointEigenSolver<Mat> es(quad);
      if (es.info() != Eigen::Success)
        throw NumericalFailure("update_w_bisection: eigendecomposition failed");
      const double cutoff = 1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
      RealVec inv = es.eigenvalues();
      for (int i = 0; i < inv.size(); ++i) inv[i] = (inv[i] > cutoff) ? 1.0 / inv[i] : 0.0;
      const Mat pinv = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().adjoint();
      for (size_t k = 0; k < rhs.size(); ++k) w[k] = pinv * rhs[k];
    }
    return w;
  };
  const auto power_of = [](const std::vector<Mat>& w) {
    double p = 0;
    for (const auto& wk : w) p += wk.squaredNorm();
    return p;
  };

  BisectionResult out;
  out.W = solve_at(0.0);
  if (power_of(out.W) <= power_budget) return out;  // slackness branch

  double lo = 0.0, hi = 1.0;
  int doublings = 0;
  while (power_of(solve_at(hi)) > power_budget) {
    hi *= 2.0;
    if (++doublings > 200)
      throw NumericalFailure("update_w_bisection: failed to bracket multiplier");
  }
  for (int it = 0; it < max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    out.W = solve_at(mid);
    out.mu = mid;
    out.iterations = it + 1;
    const double p = power_of(out.W);
    if (std::abs(p - power_budget) <= power_tol * power_budget) {
      // The midpoint may land a hair above the budget; scale back onto it so
      // the returned point is always feasible.
      if (p > power_budget)
        for (auto& wk : out.W) wk *= std::sqrt(power_budget / p);
      return out;
    }
    (p > power_budget ? lo : hi) = mid;
  }
  // converged bracket; pick the feasible endpoint
  out.mu = hi;
  out.W = solve_at(hi);
  out.iterations = max_iter;
  return out;
}

double nonhomogeneous_eta(const ChannelSet& channels, const std::vector<Mat>& gamma,
                          const std::vector<Mat>& phi) {
  return beamformer_quadratic(channels, gamma, phi).norm();
}

std::vector<Mat> update_w_inverse_free(const ChannelSet& channels,
                                       const std::vector<Mat>& gamma,
                                       const std::vector<Mat>& phi,
                                       const AuxiliaryState& aux,
                                       const RealVec& weights, int iteration,
                                       double power_budget) {
  if (!(aux.eta > 0))
    throw PreconditionViolation("update_w_inverse_free: eta must be positive");
  const double nu = extrapolation_weight(iteration);
  const Mat quad = beamformer_quadratic(channels, gamma, phi);
  const std::vector<Mat> rhs = linear_terms(channels, gamma, phi, weights);

  std::vector<Mat> q(rhs.size());
  double p_q = 0;
  for (size_t k = 0; k < rhs.size(); ++k) {
    const Mat extrapolated = aux.w_prev[k] + nu * (aux.w_prev[k] - aux.w_prev2[k]);
    q[k] = (rhs[k] - quad * extrapolated + aux.eta * extrapolated) / aux.eta;
    p_q += q[k].squaredNorm();
  }
  const double scale = (p_q > 0) ? std::min(std::sqrt(power_budget / p_q), 1.0) : 1.0;
  for (auto& qk : q) qk *= scale;
  return q;
}

}  // namespace fawsr::fp
