#pragma once

#include <filesystem>

#include "fawsr/solver.hpp"

namespace fawsr::dbp {

/// Contiguous equal-size row partition of the transmit array.
struct ClusterPlan {
  int clusters = 1;
  int rows_per_cluster = 0;

  static ClusterPlan contiguous(int total_rows, int clusters);
  int total_rows() const { return clusters * rows_per_cluster; }
  int start(int c) const { return c * rows_per_cluster; }
};

/// Split a matrix into per-cluster row blocks / reassemble.
std::vector<Mat> shard_rows(const Mat& full, const ClusterPlan& plan);
Mat stack_shards(const std::vector<Mat>& shards);

/// Distributed inner product sum_c (A^c)^H B^c, accumulated in cluster order.
Mat mul_reduce(const std::vector<Mat>& a_shards, const std::vector<Mat>& b_shards);

// ---------------------------------------------------------------------------
// Message accounting. Node 0 is the CU; nodes 1..C are the DUs.

struct Message {
  int round = 0;
  std::string kind;
  int src = 0;
  int dst = 0;
  long bytes = 0;
  long seq = 0;
};

struct MessageLog {
  std::vector<Message> messages;
  long next_seq = 0;

  void record(int round, const std::string& kind, int src, int dst,
              long complex_elems, long real_elems);
  long total_bytes() const;
  void write_csv(const std::filesystem::path& path) const;
  std::string summary_json() const;
};

// ---------------------------------------------------------------------------
// CU-side computations from the reduced blocks G~_kj = G_k W_j (L_tx x d).

/// Effective per-user receive-side product F_k^H Sigma_k G~_kj  (N x d).
Mat effective_hw(const Mat& f, const PathGeometry& geometry, const Mat& g_tilde);

struct DecObjective {
  std::vector<Mat> interference;  // M_k per user
  double wsr_nats = 0.0;
  double f_quad = 0.0;
};

DecObjective dec_objective(const std::vector<Mat>& f,
                           const std::vector<PathGeometry>& geometry,
                           const std::vector<std::vector<Mat>>& g_tilde,
                           const std::vector<Mat>& gamma, const std::vector<Mat>& phi,
                           const RealVec& weights, const RealVec& noise);

/// Closed-form auxiliary updates evaluated from the reduced blocks.
void dec_update_aux(const std::vector<Mat>& f, const std::vector<PathGeometry>& geometry,
                    const std::vector<std::vector<Mat>>& g_tilde, const RealVec& weights,
                    const RealVec& noise, std::vector<Mat>& gamma, std::vector<Mat>& phi);

/// Majorizer scale via per-cluster P_k^c shards and the eigendecomposition of
/// I + Gamma_k; equals the centralized Frobenius-norm route.
double dec_eta(const std::vector<std::vector<Mat>>& g_shards, const std::vector<Mat>& f,
               const std::vector<PathGeometry>& geometry, const std::vector<Mat>& gamma,
               const std::vector<Mat>& phi);

/// Sharded inverse-free beamformer update (extrapolation, reduced quadratic
/// term, global power rescale). Returns per-user per-cluster blocks.
std::vector<std::vector<Mat>> dec_update_w(
    const std::vector<std::vector<Mat>>& g_shards, const std::vector<Mat>& f,
    const std::vector<PathGeometry>& geometry, const std::vector<Mat>& gamma,
    const std::vector<Mat>& phi, const std::vector<std::vector<Mat>>& w_prev,
    const std::vector<std::vector<Mat>>& w_prev2, double eta, int iteration,
    const RealVec& weights, double power_budget);

/// Per-cluster transmit surrogate coefficients: gradient rows for each shard
/// plus the loosened curvature bound (dominates the centralized one).
struct DecTxCoeffs {
  std::vector<Positions> grad;  // per cluster, M_c x 3
  double delta = 0.0;
};

DecTxCoeffs dec_grad_delta_tx(const std::vector<std::vector<Mat>>& g_shards,
                              const std::vector<std::vector<Mat>>& w_shards,
                              const std::vector<std::vector<Mat>>& g_tilde,
                              const std::vector<Mat>& f,
                              const std::vector<PathGeometry>& geometry,
                              const std::vector<Mat>& gamma, const std::vector<Mat>& phi,
                              const std::vector<Positions>& t_shards,
                              const RealVec& weights);

/// CU-local receive derivative and curvature from the reduced blocks; both
/// equal their centralized counterparts exactly.
/// `g_tilde_row` holds G~_kj for all j of the user in question; `self` is the
/// index of its own block G~_kk within that row.
Mat dec_rx_derivative(const Mat& f, const PathGeometry& geometry,
                      const std::vector<Mat>& g_tilde_row, int self, const Mat& gamma,
                      const Mat& phi, double weight);
double dec_delta_rx(const Mat& f, const PathGeometry& geometry,
                    const std::vector<Mat>& g_tilde_row, int self, const Mat& gamma,
                    const Mat& phi, double weight);

// ---------------------------------------------------------------------------
// Full decentralized run.

struct DecConfig {
  int clusters = 1;
  int position_steps = 1;  // surrogate steps per side per outer iteration
  solver::SolverConfig solver;
};

struct DecReport {
  solver::SolverReport report;
  MessageLog log;
  double cu_seconds = 0.0;
  std::vector<double> du_seconds;

  /// Wall-clock model: CU time plus the slowest DU.
  double dec_seconds() const;
};

DecReport dec_solve(const Scenario& scenario, const AntennaLayout& layout,
                    const DecConfig& config);

}  // namespace fawsr::dbp
