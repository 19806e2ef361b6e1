#include "fawsr/objective.hpp"

#include <Eigen/Cholesky>
#include <cmath>

namespace fawsr::objective {

namespace {

double logdet_hermitian_pd(const Mat& a) {
  Eigen::LLT<Mat> llt(hermitize(a));
  if (llt.info() != Eigen::Success)
    throw NumericalFailure("logdet: matrix not positive definite");
  double acc = 0;
  for (int i = 0; i < a.rows(); ++i) acc += std::log(std::real(llt.matrixL()(i, i)));
  return 2.0 * acc;
}

// Total receive covariance: sum_j H_k W_j W_j^H H_k^H + sigma_k^2 I.
Mat total_receive_matrix(const ChannelSet& channels, const BeamformerSet& beams, int k) {
  const int n = static_cast<int>(channels.H[k].rows());
  Mat t = beams.noise[k] * Mat::Identity(n, n);
  for (size_t j = 0; j < beams.W.size(); ++j) {
    Mat hw = channels.H[k] * beams.W[j];
    t += hw * hw.adjoint();
  }
  return hermitize(t);
}

}  // namespace

Mat interference_matrix(const ChannelSet& channels, const BeamformerSet& beams, int k) {
  if (k < 0 || k >= static_cast<int>(channels.H.size()))
    throw std::invalid_argument("interference_matrix: bad user index");
  const int n = static_cast<int>(channels.H[k].rows());
  Mat m = beams.noise[k] * Mat::Identity(n, n);
  for (size_t j = 0; j < beams.W.size(); ++j) {
    if (static_cast<int>(j) == k) continue;
    Mat hw = channels.H[k] * beams.W[j];
    m += hw * hw.adjoint();
  }
  return hermitize(m);
}

double wsr(const ChannelSet& channels, const BeamformerSet& beams) {
  double total = 0;
  for (size_t k = 0; k < channels.H.size(); ++k) {
    if (!channels.H[k].allFinite())
      throw std::invalid_argument("wsr: non-finite channel entries");
    const Mat m = interference_matrix(channels, beams, static_cast<int>(k));
    Eigen::LLT<Mat> llt(m);
    if (llt.info() != Eigen::Success)
      throw NumericalFailure("wsr: interference matrix not positive definite");
    const Mat hw = channels.H[k] * beams.W[k];
    const int d = static_cast<int>(hw.cols());
    const Mat inner = Mat::Identity(d, d) + hw.adjoint() * llt.solve(hw);
    total += beams.weights[k] * logdet_hermitian_pd(inner);
  }
  return total;
}

double f_lag(const ChannelSet& channels, const BeamformerSet& beams,
             const std::vector<Mat>& gamma) {
  double total = 0;
  for (size_t k = 0; k < channels.H.size(); ++k) {
    const int d = static_cast<int>(beams.W[k].cols());
    const Mat eye_gamma = Mat::Identity(d, d) + gamma[k];
    const Mat t = total_receive_matrix(channels, beams, static_cast<int>(k));
    Eigen::LLT<Mat> llt(t);
    if (llt.info() != Eigen::Success)
      throw NumericalFailure("f_lag: singular total-receive matrix");
    const Mat hw = channels.H[k] * beams.W[k];
    const double quad = std::real((eye_gamma * hw.adjoint() * llt.solve(hw)).trace());
    total += beams.weights[k] *
             (logdet_hermitian_pd(eye_gamma) - std::real(gamma[k].trace()) + quad);
  }
  return total;
}

double f_quad(const ChannelSet& channels, const BeamformerSet& beams,
              const std::vector<Mat>& gamma, const std::vector<Mat>& phi) {
  double total = 0;
  for (size_t k = 0; k < channels.H.size(); ++k) {
    const double alpha = beams.weights[k];
    const int d = static_cast<int>(beams.W[k].cols());
    const Mat eye_gamma = Mat::Identity(d, d) + gamma[k];
    const Mat hw = channels.H[k] * beams.W[k];
    const Mat t = total_receive_matrix(channels, beams, static_cast<int>(k));
    const Mat cross = std::sqrt(alpha) * (hw.adjoint() * phi[k]);
    const Mat inner = cross + cross.adjoint() - phi[k].adjoint() * t * phi[k];
    total += alpha * (logdet_hermitian_pd(eye_gamma) - std::real(gamma[k].trace())) +
             std::real((eye_gamma * inner).trace());
  }
  return total;
}

double r_max_bound(const SystemDims& dims, const std::vector<PathGeometry>& geometry,
                   const BeamformerSet& beams) {
  // ||H_k||_F^2 <= M N L_tx L_rx ||Sigma_k||_F^2; with unit-modulus PRM entries
  // this reduces to M N (L_tx L_rx)^2.
  double total = 0;
  for (size_t k = 0; k < geometry.size(); ++k) {
    const double l_tx = geometry[k].num_tx_paths();
    const double l_rx = geometry[k].num_rx_paths();
    const double energy = geometry[k].path_response.squaredNorm();
    const double h_bound = dims.num_tx * dims.num_rx * l_tx * l_rx * energy;
    total += beams.weights[k] *
             std::log(1.0 + h_bound * std::sqrt(static_cast<double>(dims.num_rx)) *
                                beams.power_budget / beams.noise[k]);
  }
  return dims.num_streams * total;
}

}  // namespace fawsr::objective
