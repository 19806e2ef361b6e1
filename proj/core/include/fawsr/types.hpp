#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace fawsr {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using RealMat = Eigen::MatrixXd;
using Vec = Eigen::VectorXcd;
using RealVec = Eigen::VectorXd;
using Vec3 = Eigen::Vector3d;
using Positions = Eigen::Matrix<double, Eigen::Dynamic, 3>;  // one antenna per row

/// Raised when a linear solve, eigendecomposition, or bracketing search
/// cannot produce a usable result.
struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when an algorithmic precondition (eta > 0, delta > 0, ...) is
/// violated by the caller.
struct PreconditionViolation : std::logic_error {
  using std::logic_error::logic_error;
};

/// Raised by the decentralized fabric on stale or out-of-order reductions.
struct ProtocolViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Array and user counts for one scenario.
struct SystemDims {
  int num_tx = 1;        // M, transmit antennas at the base station
  int num_rx = 1;        // N, receive antennas per user
  int num_users = 1;     // K
  int num_streams = 1;   // d, parallel streams per user
  int num_clusters = 1;  // C, decentralized cluster count

  int cluster_size() const { return num_tx / num_clusters; }

  void validate() const {
    if (num_tx < 1 || num_rx < 1 || num_users < 1 || num_streams < 1 || num_clusters < 1)
      throw std::invalid_argument("all dimension counts must be >= 1");
    if (num_streams > std::min(num_tx, num_rx))
      throw std::invalid_argument("stream count exceeds min(num_tx, num_rx)");
    if (num_tx % num_clusters != 0)
      throw std::invalid_argument("num_tx must be divisible by num_clusters");
  }
};

/// Far-field propagation geometry for one user: angle sets for every
/// transmit/receive path and the path-response matrix coupling them.
struct PathGeometry {
  RealVec aod_elevation;  // L_tx entries, radians in [0, pi)
  RealVec aod_azimuth;
  RealVec aoa_elevation;  // L_rx entries
  RealVec aoa_azimuth;
  Mat path_response;      // L_rx x L_tx
  double wavelength = 1.0;  // meters

  int num_tx_paths() const { return static_cast<int>(aod_elevation.size()); }
  int num_rx_paths() const { return static_cast<int>(aoa_elevation.size()); }

  void validate() const {
    if (wavelength <= 0) throw std::invalid_argument("wavelength must be positive");
    if (aod_elevation.size() != aod_azimuth.size() || aoa_elevation.size() != aoa_azimuth.size())
      throw std::invalid_argument("angle list lengths mismatch");
    if (path_response.rows() != num_rx_paths() || path_response.cols() != num_tx_paths())
      throw std::invalid_argument("path-response matrix shape mismatch");
  }
};

/// Axis-aligned cuboid movable region.
struct Box {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  bool contains(const Vec3& p, double tol = 1e-12) const {
    return (p.array() >= lo.array() - tol).all() && (p.array() <= hi.array() + tol).all();
  }
  Vec3 clamp(const Vec3& p) const { return p.cwiseMax(lo).cwiseMin(hi); }
  Vec3 center() const { return 0.5 * (lo + hi); }
};

/// Transmit and per-user receive antenna positions plus their movable regions.
struct AntennaLayout {
  Positions tx;                            // M x 3, meters
  std::vector<Positions> rx;               // K matrices, N x 3
  std::vector<Box> tx_boxes;               // M boxes
  std::vector<std::vector<Box>> rx_boxes;  // K x N boxes
  double min_separation = 0.0;             // D, meters

  bool inside_boxes(double tol = 1e-12) const {
    for (int m = 0; m < tx.rows(); ++m)
      if (!tx_boxes[m].contains(tx.row(m).transpose(), tol)) return false;
    for (size_t k = 0; k < rx.size(); ++k)
      for (int n = 0; n < rx[k].rows(); ++n)
        if (!rx_boxes[k][n].contains(rx[k].row(n).transpose(), tol)) return false;
    return true;
  }
};

/// Channels assembled from geometry and layout: H_k together with the
/// transmit/receive field-response matrices they factor through.
struct ChannelSet {
  std::vector<Mat> H;  // K matrices, N x M
  std::vector<Mat> G;  // K matrices, L_tx x M  (transmit FRM)
  std::vector<Mat> F;  // K matrices, L_rx x N  (receive FRM)
};

/// Per-user precoders plus the shared power budget, priorities and noise.
struct BeamformerSet {
  std::vector<Mat> W;        // K matrices, M x d
  double power_budget = 1.0;  // P_max, watts
  RealVec weights;           // alpha_k
  RealVec noise;             // sigma_k^2, watts

  double total_power() const {
    double p = 0;
    for (const auto& w : W) p += w.squaredNorm();
    return p;
  }
};

/// Auxiliary variables of the fractional-programming reformulation plus the
/// extrapolation memory used by the inverse-free beamformer update.
struct AuxiliaryState {
  std::vector<Mat> gamma;   // K Hermitian d x d
  std::vector<Mat> phi;     // K complex N x d
  std::vector<Mat> w_prev;  // extrapolation memory, one step back
  std::vector<Mat> w_prev2; // two steps back
  double eta = 0.0;
};

inline Mat hermitize(const Mat& a) { return 0.5 * (a + a.adjoint()); }

}  // namespace fawsr
