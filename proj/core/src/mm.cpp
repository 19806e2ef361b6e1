#include "fawsr/mm.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "fawsr/channel.hpp"
#include "fawsr/objective.hpp"

namespace fawsr::mm {

namespace {

double spectral_norm_hermitian(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

TxDerivatives tx_derivatives(const ChannelSet& channels, const BeamformerSet& beams,
                             const std::vector<Mat>& gamma, const std::vector<Mat>& phi,
                             const std::vector<PathGeometry>& geometry) {
  const size_t k_count = channels.H.size();
  const int m = static_cast<int>(channels.G[0].cols());
  const int d = static_cast<int>(beams.W[0].cols());
  TxDerivatives out;
  out.w_hat = Mat::Zero(m, m);
  for (const auto& w : beams.W) out.w_hat += w * w.adjoint();
  out.D.resize(k_count);
  out.sigma_hat.resize(k_count);
  for (size_t k = 0; k < k_count; ++k) {
    const Mat& sigma = geometry[k].path_response;  // L_rx x L_tx
    const Mat eye_gamma = Mat::Identity(d, d) + gamma[k];
    const Mat fp = channels.F[k] * phi[k];  // L_rx x d
    out.sigma_hat[k] = sigma.adjoint() * fp * eye_gamma * fp.adjoint() * sigma;
    out.D[k] = std::sqrt(beams.weights[k]) * beams.W[k] * eye_gamma * fp.adjoint() * sigma -
               out.w_hat * channels.G[k].adjoint() * out.sigma_hat[k];
  }
  return out;
}

Positions grad_tx(const TxDerivatives& deriv, const std::vector<PathGeometry>& geometry,
                  const AntennaLayout& layout) {
  const int m_count = static_cast<int>(layout.tx.rows());
  Positions grad = Positions::Zero(m_count, 3);
  for (size_t k = 0; k < geometry.size(); ++k) {
    const double wavenumber = 2.0 * M_PI / geometry[k].wavelength;
    const int paths = geometry[k].num_tx_paths();
    for (int q = 0; q < paths; ++q) {
      const Vec3 dir = channel::direction_vector(geometry[k].aod_elevation[q],
                                                 geometry[k].aod_azimuth[q]);
      for (int m = 0; m < m_count; ++m) {
        const Complex dmq = deriv.D[k](m, q);
        const double rho = dir.dot(layout.tx.row(m).transpose());
        const double xi = std::arg(dmq) + wavenumber * rho;
        grad.row(m) -=
            (2.0 * wavenumber) * std::abs(dmq) * std::sin(xi) * dir.transpose();
      }
    }
  }
  return grad;
}

double delta_tx(const TxDerivatives& deriv, const BeamformerSet& beams,
                const std::vector<Mat>& gamma, const std::vector<Mat>& phi,
                const ChannelSet& channels, const std::vector<PathGeometry>& geometry) {
  const int m_count = static_cast<int>(deriv.w_hat.rows());
  const int d = static_cast<int>(beams.W[0].cols());
  const double sqrt_m = std::sqrt(static_cast<double>(m_count));
  double best = 0.0;
  std::vector<double> sigma_norm(geometry.size());
  for (size_t k = 0; k < geometry.size(); ++k)
    sigma_norm[k] = spectral_norm_hermitian(deriv.sigma_hat[k]);
  for (int m = 0; m < m_count; ++m) {
    const double row_abs_sum = deriv.w_hat.row(m).cwiseAbs().sum();
    const double row_norm = deriv.w_hat.row(m).norm();
    double acc = 0.0;
    for (size_t k = 0; k < geometry.size(); ++k) {
      const double l_tx = geometry[k].num_tx_paths();
      const Mat eye_gamma = Mat::Identity(d, d) + gamma[k];
      const Mat row = beams.W[k].row(m) * eye_gamma * phi[k].adjoint() *
                      channels.F[k].adjoint() * geometry[k].path_response;
      acc += l_tx * ((row_abs_sum + sqrt_m * row_norm) * sigma_norm[k] +
                     std::sqrt(beams.weights[k] / l_tx) * row.norm());
    }
    best = std::max(best, acc);
  }
  const double wavelength = geometry[0].wavelength;
  return 24.0 * M_PI * M_PI / (wavelength * wavelength) * best;
}

double delta_tx_loose(const TxDerivatives& deriv, const BeamformerSet& beams,
                      const std::vector<Mat>& gamma, const std::vector<Mat>& phi,
                      const ChannelSet& channels,
                      const std::vector<PathGeometry>& geometry) {
  const int m_count = static_cast<int>(deriv.w_hat.rows());
  const int d = static_cast<int>(beams.W[0].cols());
  const int users = static_cast<int>(geometry.size());
  const double sqrt_m = std::sqrt(static_cast<double>(m_count));
  RealVec row_norm_sum = RealVec::Zero(users);  // sum_j ||[W_t]_j||_2 per user t
  for (int t = 0; t < users; ++t)
    row_norm_sum[t] = beams.W[t].rowwise().norm().sum();
  std::vector<double> sigma_norm(users);
  for (int k = 0; k < users; ++k)
    sigma_norm[k] = spectral_norm_hermitian(deriv.sigma_hat[k]);
  double best = 0.0;
  for (int m = 0; m < m_count; ++m) {
    double abs_sum_bound = 0.0;
    for (int t = 0; t < users; ++t)
      abs_sum_bound += beams.W[t].row(m).norm() * row_norm_sum[t];
    const double row_norm = deriv.w_hat.row(m).norm();
    double acc = 0.0;
    for (int k = 0; k < users; ++k) {
      const double l_tx = geometry[k].num_tx_paths();
      const Mat eye_gamma = Mat::Identity(d, d) + gamma[k];
      const Mat row = beams.W[k].row(m) * eye_gamma * phi[k].adjoint() *
                      channels.F[k].adjoint() * geometry[k].path_response;
      acc += l_tx * ((abs_sum_bound + sqrt_m * row_norm) * sigma_norm[k] +
                     std::sqrt(beams.weights[k] / l_tx) * row.norm());
    }
    best = std::max(best, acc);
  }
  const double wavelength = geometry[0].wavelength;
  return 24.0 * M_PI * M_PI / (wavelength * wavelength) * best;
}

Positions mm_step_tx(const AntennaLayout& layout, const SurrogateCoeffs& coeffs) {
  if (coeffs.delta <= 0) {
    if (coeffs.grad.norm() > 0)
      throw PreconditionViolation("mm_step_tx: zero curvature with nonzero gradient");
    return layout.tx;
  }
  Positions next = layout.tx + coeffs.grad / coeffs.delta;
  for (int m = 0; m < next.rows(); ++m)
    next.row(m) = layout.tx_boxes[m].clamp(next.row(m).transpose()).transpose();
  return next;
}

Mat rx_derivative(const ChannelSet& channels, const BeamformerSet& beams,
                  const std::vector<Mat>& gamma, const std::vector<Mat>& phi,
                  const std::vector<PathGeometry>& geometry, int k) {
  const int d = static_cast<int>(beams.W[k].cols());
  const int m = static_cast<int>(beams.W[0].rows());
  const Mat eye_gamma = Mat::Identity(d, d) + gamma[k];
  const Mat sg = geometry[k].path_response * channels.G[k];  // L_rx x M
  Mat w_hat = Mat::Zero(m, m);
  for (const auto& w : beams.W) w_hat += w * w.adjoint();
  const Mat sigma_hat_rx = sg * w_hat * sg.adjoint();  // L_rx x L_rx
  return std::sqrt(beams.weights[k]) * phi[k] * eye_gamma * (sg * beams.W[k]).adjoint() -
         phi[k] * eye_gamma * phi[k].adjoint() * channels.F[k].adjoint() * sigma_hat_rx;
}

Positions grad_rx(const Mat& d_rx, const std::vector<PathGeometry>& geometry,
                  const AntennaLayout& layout, int k) {
  const int n_count = static_cast<int>(layout.rx[k].rows());
  Positions grad = Positions::Zero(n_count, 3);
  const double wavenumber = 2.0 * M_PI / geometry[k].wavelength;
  for (int q = 0; q < geometry[k].num_rx_paths(); ++q) {
    const Vec3 dir = channel::direction_vector(geometry[k].aoa_elevation[q],
                                               geometry[k].aoa_azimuth[q]);
    for (int n = 0; n < n_count; ++n) {
      const Complex dnq = d_rx(n, q);
      const double xi =
          std::arg(dnq) + wavenumber * dir.dot(layout.rx[k].row(n).transpose());
      grad.row(n) -= (2.0 * wavenumber) * std::abs(dnq) * std::sin(xi) * dir.transpose();
    }
  }
  return grad;
}

double delta_rx(const ChannelSet& channels, const BeamformerSet& beams,
                const std::vector<Mat>& gamma, const std::vector<Mat>& phi,
                const std::vector<PathGeometry>& geometry, int k) {
  const int n_count = static_cast<int>(phi[k].rows());
  const int d = static_cast<int>(beams.W[k].cols());
  const double l_rx = geometry[k].num_rx_paths();
  const Mat eye_gamma = Mat::Identity(d, d) + gamma[k];
  Mat w_hat = Mat::Zero(beams.W[0].rows(), beams.W[0].rows());
  for (const auto& w : beams.W) w_hat += w * w.adjoint();
  const Mat sg = geometry[k].path_response * channels.G[k];  // L_rx x M
  const Mat sigma_hat_rx = sg * w_hat * sg.adjoint();
  const double sigma_norm = spectral_norm_hermitian(sigma_hat_rx);
  const Mat phi_quad = phi[k] * eye_gamma * phi[k].adjoint();  // N x N
  double best = 0.0;
  for (int n = 0; n < n_count; ++n) {
    const double row_abs_sum = phi_quad.row(n).cwiseAbs().sum();
    const double row_norm = (phi[k].row(n) * eye_gamma * phi[k].adjoint()).norm();
    const Mat cross = phi[k].row(n) * eye_gamma * beams.W[k].adjoint() *
                      channels.G[k].adjoint() * geometry[k].path_response.adjoint();
    const double acc =
        (row_abs_sum + std::sqrt(static_cast<double>(n_count)) * row_norm) * sigma_norm +
        std::sqrt(beams.weights[k] / l_rx) * cross.norm();
    best = std::max(best, acc);
  }
  const double wavelength = geometry[k].wavelength;
  return 24.0 * M_PI * M_PI / (wavelength * wavelength) * l_rx * best;
}

Positions mm_step_rx(const AntennaLayout& layout, const SurrogateCoeffs& coeffs, int k) {
  if (coeffs.delta <= 0) {
    if (coeffs.grad.norm() > 0)
      throw PreconditionViolation("mm_step_rx: zero curvature with nonzero gradient");
    return layout.rx[k];
  }
  Positions next = layout.rx[k] + coeffs.grad / coeffs.delta;
  for (int n = 0; n < next.rows(); ++n)
    next.row(n) = layout.rx_boxes[k][n].clamp(next.row(n).transpose()).transpose();
  return next;
}

std::vector<double> mm_loop_tx(const std::vector<PathGeometry>& geometry,
                               AntennaLayout& layout, ChannelSet& channels,
                               const BeamformerSet& beams, const std::vector<Mat>& gamma,
                               const std::vector<Mat>& phi, const MmLoopConfig& config) {
  std::vector<double> trace{objective::f_quad(channels, beams, gamma, phi)};
  TxDerivatives deriv = tx_derivatives(channels, beams, gamma, phi, geometry);
  const double delta = delta_tx(deriv, beams, gamma, phi, channels, geometry);
  if (delta <= 0) return trace;  // objective constant in positions
  for (int it = 0; it < config.max_iter; ++it) {
    if (it > 0) deriv = tx_derivatives(channels, beams, gamma, phi, geometry);
    SurrogateCoeffs coeffs{grad_tx(deriv, geometry, layout), delta};
    layout.tx = mm_step_tx(layout, coeffs);
    channel::update_tx_side(geometry, layout, channels);
    trace.push_back(objective::f_quad(channels, beams, gamma, phi));
    const double prev = trace[trace.size() - 2];
    if (std::abs(trace.back() - prev) <= config.tol * (1.0 + std::abs(prev))) break;
  }
  return trace;
}

std::vector<double> mm_loop_rx(const std::vector<PathGeometry>& geometry,
                               AntennaLayout& layout, ChannelSet& channels,
                               const BeamformerSet& beams, const std::vector<Mat>& gamma,
                               const std::vector<Mat>& phi, int k,
                               const MmLoopConfig& config) {
  std::vector<double> trace{objective::f_quad(channels, beams, gamma, phi)};
  const double delta = delta_rx(channels, beams, gamma, phi, geometry, k);
  if (delta <= 0) return trace;
  for (int it = 0; it < config.max_iter; ++it) {
    const Mat d_rx = rx_derivative(channels, beams, gamma, phi, geometry, k);
    SurrogateCoeffs coeffs{grad_rx(d_rx, geometry, layout, k), delta};
    layout.rx[k] = mm_step_rx(layout, coeffs, k);
    channel::update_rx_side(geometry, layout, k, channels);
    trace.push_back(objective::f_quad(channels, beams, gamma, phi));
    const double prev = trace[trace.size() - 2];
    if (std::abs(trace.back() - prev) <= config.tol * (1.0 + std::abs(prev))) break;
  }
  return trace;
}

SeparationReport linearized_separation_check(const Positions& candidate,
                                             const Positions& anchor, double min_sep) {
  SeparationReport report;
  for (int m = 0; m < anchor.rows(); ++m) {
    for (int mp = m + 1; mp < anchor.rows(); ++mp) {
      const Vec3 anchor_diff = (anchor.row(m) - anchor.row(mp)).transpose();
      const double anchor_dist = anchor_diff.norm();
      if (anchor_dist == 0)
        throw std::invalid_argument("linearized_separation_check: coincident anchors");
      const Vec3 diff = (candidate.row(m) - candidate.row(mp)).transpose();
      if (anchor_diff.dot(diff) / anchor_dist < min_sep) {
        report.ok = false;
        report.violations.emplace_back(m, mp);
      }
    }
  }
  return report;
}

}  // namespace fawsr::mm
