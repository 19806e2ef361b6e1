#include "fawsr/dbp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "fawsr/channel.hpp"
#include "fawsr/fp.hpp"
#include "fawsr/objective.hpp"

namespace fawsr::dbp {

namespace {

using Clock = std::chrono::steady_clock;

double logdet_hermitian_pd(const Mat& a) {
  Eigen::LLT<Mat> llt(hermitize(a));
  if (llt.info() != Eigen::Success)
    throw NumericalFailure("dec logdet: matrix not positive definite");
  double acc = 0;
  for (int i = 0; i < a.rows(); ++i) acc += std::log(std::real(llt.matrixL()(i, i)));
  return 2.0 * acc;
}

double spectral_norm_hermitian(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

ClusterPlan ClusterPlan::contiguous(int total_rows, int clusters) {
  if (clusters < 1 || total_rows < 1 || total_rows % clusters != 0)
    throw std::invalid_argument("cluster plan: rows must divide evenly into clusters");
  ClusterPlan plan;
  plan.clusters = clusters;
  plan.rows_per_cluster = total_rows / clusters;
  return plan;
}

std::vector<Mat> shard_rows(const Mat& full, const ClusterPlan& plan) {
  if (full.rows() != plan.total_rows())
    throw std::invalid_argument("shard_rows: row count does not match plan");
  std::vector<Mat> out(plan.clusters);
  for (int c = 0; c < plan.clusters; ++c)
    out[c] = full.middleRows(plan.start(c), plan.rows_per_cluster);
  return out;
}

Mat stack_shards(const std::vector<Mat>& shards) {
  if (shards.empty()) throw std::invalid_argument("stack_shards: empty input");
  long rows = 0;
  for (const auto& s : shards) rows += s.rows();
  Mat out(rows, shards[0].cols());
  long at = 0;
  for (const auto& s : shards) {
    if (s.cols() != out.cols())
      throw std::invalid_argument("stack_shards: column mismatch");
    out.middleRows(at, s.rows()) = s;
    at += s.rows();
  }
  return out;
}

Mat mul_reduce(const std::vector<Mat>& a_shards, const std::vector<Mat>& b_shards) {
  if (a_shards.size() != b_shards.size() || a_shards.empty())
    throw std::invalid_argument("mul_reduce: shard count mismatch");
  Mat acc = Mat::Zero(a_shards[0].cols(), b_shards[0].cols());
  for (size_t c = 0; c < a_shards.size(); ++c) {
    if (a_shards[c].rows() != b_shards[c].rows() || a_shards[c].cols() != acc.rows() ||
        b_shards[c].cols() != acc.cols())
      throw std::invalid_argument("mul_reduce: shard shape mismatch");
    acc += a_shards[c].adjoint() * b_shards[c];
  }
  return acc;
}

void MessageLog::record(int round, const std::string& kind, int src, int dst,
                        long complex_elems, long real_elems) {
  Message msg;
  msg.round = round;
  msg.kind = kind;
  msg.src = src;
  msg.dst = dst;
  msg.bytes = 16 * complex_elems + 8 * real_elems;
  msg.seq = next_seq++;
  messages.push_back(std::move(msg));
}

long MessageLog::total_bytes() const {
  long total = 0;
  for (const auto& m : messages) total += m.bytes;
  return total;
}

void MessageLog::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write message log: " + path.string());
  out << "round,kind,src,dst,bytes,seq\n";
  for (const auto& m : messages)
    out << m.round << ',' << m.kind << ',' << m.src << ',' << m.dst << ',' << m.bytes
        << ',' << m.seq << '\n';
}

std::string MessageLog::summary_json() const {
  nlohmann::json j;
  j["messages"] = messages.size();
  j["total_bytes"] = total_bytes();
  std::map<int, long> per_round;
  std::map<std::string, long> per_kind;
  for (const auto& m : messages) {
    per_round[m.round] += m.bytes;
    per_kind[m.kind] += m.bytes;
  }
  long round_max = 0;
  for (const auto& [round, bytes] : per_round) round_max = std::max(round_max, bytes);
  j["max_round_bytes"] = round_max;
  j["bytes_by_kind"] = per_kind;
  return j.dump(2);
}

Mat effective_hw(const Mat& f, const PathGeometry& geometry, const Mat& g_tilde) {
  return f.adjoint() * geometry.path_response * g_tilde;  // N x d
}

DecObjective dec_objective(const std::vector<Mat>& f,
                           const std::vector<PathGeometry>& geometry,
                           const std::vector<std::vector<Mat>>& g_tilde,
                           const std::vector<Mat>& gamma, const std::vector<Mat>& phi,
                           const RealVec& weights, const RealVec& noise) {
  const int users = static_cast<int>(f.size());
  DecObjective out;
  out.interference.resize(users);
  for (int k = 0; k < users; ++k) {
    const int n = static_cast<int>(f[k].cols());
    const int d = static_cast<int>(g_tilde[k][k].cols());
    std::vector<Mat> hw(users);
    for (int j = 0; j < users; ++j)
      hw[j] = effective_hw(f[k], geometry[k], g_tilde[k][j]);
    Mat m = noise[k] * Mat::Identity(n, n);
    for (int j = 0; j < users; ++j)
      if (j != k) m += hw[j] * hw[j].adjoint();
    out.interference[k] = hermitize(m);

    Eigen::LLT<Mat> llt(out.interference[k]);
    if (llt.info() != Eigen::Success)
      throw NumericalFailure("dec_objective: interference matrix not positive definite");
    const Mat inner = Mat::Identity(d, d) + hw[k].adjoint() * llt.solve(hw[k]);
    out.wsr_nats += weights[k] * logdet_hermitian_pd(inner);

    const Mat total = hermitize(out.interference[k] + hw[k] * hw[k].adjoint());
    const Mat eye_gamma = Mat::Identity(d, d) + gamma[k];
    const Mat cross = std::sqrt(weights[k]) * (hw[k].adjoint() * phi[k]);
    const Mat quad = cross + cross.adjoint() - phi[k].adjoint() * total * phi[k];
    out.f_quad += weights[k] * (logdet_hermitian_pd(eye_gamma) -
                                std::real(gamma[k].trace())) +
                  std::real((eye_gamma * quad).trace());
  }
  return out;
}

void dec_update_aux(const std::vector<Mat>& f, const std::vector<PathGeometry>& geometry,
                    const std::vector<std::vector<Mat>>& g_tilde, const RealVec& weights,
                    const RealVec& noise, std::vector<Mat>& gamma, std::vector<Mat>& phi) {
  const int users = static_cast<int>(f.size());
  gamma.resize(users);
  phi.resize(users);
  for (int k = 0; k < users; ++k) {
    const int n = static_cast<int>(f[k].cols());
    Mat m = noise[k] * Mat::Identity(n, n);
    for (int j = 0; j < users; ++j) {
      if (j == k) continue;
      const Mat hw = effective_hw(f[k], geometry[k], g_tilde[k][j]);
      m += hw * hw.adjoint();
    }
    const Mat hw_self = effective_hw(f[k], geometry[k], g_tilde[k][k]);
    {
      Eigen::LLT<Mat> llt(hermitize(m));
      if (llt.info() != Eigen::Success)
        throw NumericalFailure("dec_update_aux: singular interference matrix");
      gamma[k] = hermitize(hw_self.adjoint() * llt.solve(hw_self));
    }
    {
      Eigen::LLT<Mat> llt(hermitize(m + hw_self * hw_self.adjoint()));
      if (llt.info() != Eigen::Success)
        throw NumericalFailure("dec_update_aux: singular total-receive matrix");
      phi[k] = std::sqrt(weights[k]) * llt.solve(hw_self);
    }
  }
}

namespace {

// Eigendecomposition factor of I + Gamma_k folded through the receive side:
// Sigma^H F Phi Xi sqrt(Lambda), the per-user seed of the P_k^c shards.
Mat eta_seed(const Mat& f, const PathGeometry& geometry, const Mat& gamma,
             const Mat& phi) {
  const int d = static_cast<int>(gamma.rows());
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(Mat::Identity(d, d) + gamma));
  if (es.info() != Eigen::Success)
    throw NumericalFailure("dec_eta: eigendecomposition failed");
  if (es.eigenvalues().minCoeff() < -1e-12)
    throw NumericalFailure("dec_eta: I + Gamma not positive semidefinite");
  const RealVec lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return geometry.path_response.adjoint() * f * phi * es.eigenvectors() *
         lam.asDiagonal();
}

}  // namespace

double dec_eta(const std::vector<std::vector<Mat>>& g_shards, const std::vector<Mat>& f,
               const std::vector<PathGeometry>& geometry, const std::vector<Mat>& gamma,
               const std::vector<Mat>& phi) {
  const int users = static_cast<int>(g_shards.size());
  const int clusters = static_cast<int>(g_shards[0].size());
  std::vector<std::vector<Mat>> p(users);  // [k][c] M_c x d
  for (int k = 0; k < users; ++k) {
    const Mat seed = eta_seed(f[k], geometry[k], gamma[k], phi[k]);
    p[k].resize(clusters);
    for (int c = 0; c < clusters; ++c) p[k][c] = g_shards[k][c].adjoint() * seed;
  }
  double acc = 0;
  for (int k = 0; k < users; ++k)
    for (int j = 0; j < users; ++j) acc += mul_reduce(p[k], p[j]).squaredNorm();
  return std::sqrt(acc);
}

std::vector<std::vector<Mat>> dec_update_w(
    const std::vector<std::vector<Mat>>& g_shards, const std::vector<Mat>& f,
    const std::vector<PathGeometry>& geometry, const std::vector<Mat>& gamma,
    const std::vector<Mat>& phi, const std::vector<std::vector<Mat>>& w_prev,
    const std::vector<std::vector<Mat>>& w_prev2, double eta, int iteration,
    const RealVec& weights, double power_budget) {
  if (!(eta > 0)) throw PreconditionViolation("dec_update_w: eta must be positive");
  const int users = static_cast<int>(g_shards.size());
  const int clusters = static_cast<int>(g_shards[0].size());
  const double nu = fp::extrapolation_weight(iteration);

  std::vector<std::vector<Mat>> upsilon(users);
  for (int k = 0; k < users; ++k) {
    upsilon[k].resize(clusters);
    for (int c = 0; c < clusters; ++c)
      upsilon[k][c] = w_prev[k][c] + nu * (w_prev[k][c] - w_prev2[k][c]);
  }

  // Reduced extrapolated blocks G_j Upsilon_k, then the per-user linear and
  // quadratic broadcast payloads.
  std::vector<Mat> linear(users);  // Sigma^H F Phi (I+Gamma), L_tx x d
  for (int j = 0; j < users; ++j) {
    const int d = static_cast<int>(gamma[j].rows());
    linear[j] = geometry[j].path_response.adjoint() * f[j] * phi[j] *
                (Mat::Identity(d, d) + gamma[j]);
  }
  std::vector<std::vector<Mat>> quad(users, std::vector<Mat>(users));  // [j][k]
  for (int j = 0; j < users; ++j) {
    const Mat back = phi[j].adjoint() * f[j].adjoint() * geometry[j].path_response;
    for (int k = 0; k < users; ++k) {
      Mat ups_tilde = Mat::Zero(g_shards[j][0].rows(), upsilon[k][0].cols());
      for (int c = 0; c < clusters; ++c) ups_tilde += g_shards[j][c] * upsilon[k][c];
      quad[j][k] = linear[j] * (back * ups_tilde);
    }
  }

  std::vector<std::vector<Mat>> q(users, std::vector<Mat>(clusters));
  double p_q = 0;
  for (int k = 0; k < users; ++k) {
    const double root_alpha = std::sqrt(weights[k]);
    for (int c = 0; c < clusters; ++c) {
      Mat acc = root_alpha * (g_shards[k][c].adjoint() * linear[k]);
      for (int j = 0; j < users; ++j) acc -= g_shards[j][c].adjoint() * quad[j][k];
      q[k][c] = (acc + eta * upsilon[k][c]) / eta;
      p_q += q[k][c].squaredNorm();
    }
  }
  const double scale = (p_q > 0) ? std::min(std::sqrt(power_budget / p_q), 1.0) : 1.0;
  for (auto& user : q)
    for (auto& shard : user) shard *= scale;
  return q;
}

DecTxCoeffs dec_grad_delta_tx(const std::vector<std::vector<Mat>>& g_shards,
                              const std::vector<std::vector<Mat>>& w_shards,
                              const std::vector<std::vector<Mat>>& g_tilde,
                              const std::vector<Mat>& f,
                              const std::vector<PathGeometry>& geometry,
                              const std::vector<Mat>& gamma, const std::vector<Mat>& phi,
                              const std::vector<Positions>& t_shards,
                              const RealVec& weights) {
  const int users = static_cast<int>(g_shards.size());
  const int clusters = static_cast<int>(g_shards[0].size());
  int m_total = 0;
  for (int c = 0; c < clusters; ++c) m_total += static_cast<int>(w_shards[0][c].rows());
  const double sqrt_m = std::sqrt(static_cast<double>(m_total));

  // CU-side broadcast coefficients.
  std::vector<Mat> e(users);        // Phi^H F^H Sigma, d x L_tx
  std::vector<Mat> mid(users);      // Sigma^H F Phi (I+Gamma) Phi^H F^H Sigma
  std::vector<double> mid_norm(users);
  for (int k = 0; k < users; ++k) {
    const int d = static_cast<int>(gamma[k].rows());
    e[k] = phi[k].adjoint() * f[k].adjoint() * geometry[k].path_response;
    mid[k] = e[k].adjoint() * (Mat::Identity(d, d) + gamma[k]) * e[k];
    mid_norm[k] = spectral_norm_hermitian(mid[k]);
  }
  std::vector<std::vector<Mat>> c_coef(users, std::vector<Mat>(users));  // [k][j]
  for (int k = 0; k < users; ++k)
    for (int j = 0; j < users; ++j) c_coef[k][j] = g_tilde[k][j].adjoint() * mid[k];

  // Reduced beamformer inner products and global row-norm sums.
  std::vector<std::vector<Mat>> w_tilde(users, std::vector<Mat>(users));
  for (int t = 0; t < users; ++t)
    for (int s = 0; s < users; ++s) w_tilde[t][s] = mul_reduce(w_shards[t], w_shards[s]);
  RealVec row_norm_sum = RealVec::Zero(users);
  for (int t = 0; t < users; ++t)
    for (int c = 0; c < clusters; ++c)
      row_norm_sum[t] += w_shards[t][c].rowwise().norm().sum();

  DecTxCoeffs out;
  out.grad.resize(clusters);
  const double wavelength = geometry[0].wavelength;
  double best = 0.0;
  for (int c = 0; c < clusters; ++c) {
    const int m_c = static_cast<int>(w_shards[0][c].rows());
    out.grad[c] = Positions::Zero(m_c, 3);

    // Per-user derivative shard D_{k,c}.
    std::vector<Mat> d_shard(users);
    for (int k = 0; k < users; ++k) {
      const int d = static_cast<int>(gamma[k].rows());
      Mat acc = std::sqrt(weights[k]) * w_shards[k][c] *
                (Mat::Identity(d, d) + gamma[k]) * e[k];
      for (int j = 0; j < users; ++j) acc -= w_shards[j][c] * c_coef[k][j];
      d_shard[k] = std::move(acc);
    }

    for (int k = 0; k < users; ++k) {
      const double wavenumber = 2.0 * M_PI / geometry[k].wavelength;
      for (int q = 0; q < geometry[k].num_tx_paths(); ++q) {
        const Vec3 dir = channel::direction_vector(geometry[k].aod_elevation[q],
                                                   geometry[k].aod_azimuth[q]);
        for (int m = 0; m < m_c; ++m) {
          const Complex dmq = d_shard[k](m, q);
          const double xi =
              std::arg(dmq) + wavenumber * dir.dot(t_shards[c].row(m).transpose());
          out.grad[c].row(m) -=
              (2.0 * wavenumber) * std::abs(dmq) * std::sin(xi) * dir.transpose();
        }
      }
    }

    for (int m = 0; m < m_c; ++m) {
      double abs_sum_bound = 0.0;
      double row_norm_sq = 0.0;
      for (int t = 0; t < users; ++t) {
        abs_sum_bound += w_shards[t][c].row(m).norm() * row_norm_sum[t];
        for (int s = 0; s < users; ++s)
          row_norm_sq += std::real((w_shards[t][c].row(m) * w_tilde[t][s] *
                                    w_shards[s][c].row(m).adjoint())(0, 0));
      }
      const double row_norm = std::sqrt(std::max(row_norm_sq, 0.0));
      double acc = 0.0;
      for (int k = 0; k < users; ++k) {
        const int d = static_cast<int>(gamma[k].rows());
        const double l_tx = geometry[k].num_tx_paths();
        const Mat row = w_shards[k][c].row(m) * (Mat::Identity(d, d) + gamma[k]) * e[k];
        acc += l_tx * ((abs_sum_bound + sqrt_m * row_norm) * mid_norm[k] +
                       std::sqrt(weights[k] / l_tx) * row.norm());
      }
      best = std::max(best, acc);
    }
  }
  out.delta = 24.0 * M_PI * M_PI / (wavelength * wavelength) * best;
  return out;
}

Mat dec_rx_derivative(const Mat& f, const PathGeometry& geometry,
                      const std::vector<Mat>& g_tilde_row, int self, const Mat& gamma,
                      const Mat& phi, double weight) {
  const int d = static_cast<int>(gamma.rows());
  const Mat eye_gamma = Mat::Identity(d, d) + gamma;
  const int l_rx = geometry.num_rx_paths();
  Mat sigma_hat = Mat::Zero(l_rx, l_rx);
  for (const auto& g : g_tilde_row) {
    const Mat sg = geometry.path_response * g;  // L_rx x d
    sigma_hat += sg * sg.adjoint();
  }
  const Mat sg_self = geometry.path_response * g_tilde_row[self];
  return std::sqrt(weight) * phi * eye_gamma * sg_self.adjoint() -
         phi * eye_gamma * phi.adjoint() * f.adjoint() * sigma_hat;
}

double dec_delta_rx(const Mat& f, const PathGeometry& geometry,
                    const std::vector<Mat>& g_tilde_row, int self, const Mat& gamma,
                    const Mat& phi, double weight) {
  const int d = static_cast<int>(gamma.rows());
  const int n = static_cast<int>(phi.rows());
  const double l_rx = geometry.num_rx_paths();
  const Mat eye_gamma = Mat::Identity(d, d) + gamma;
  Mat sigma_hat = Mat::Zero(geometry.num_rx_paths(), geometry.num_rx_paths());
  for (const auto& g : g_tilde_row) {
    const Mat sg = geometry.path_response * g;
    sigma_hat += sg * sg.adjoint();
  }
  const double sigma_norm = spectral_norm_hermitian(sigma_hat);
  const Mat sg_self = geometry.path_response * g_tilde_row[self];
  const Mat phi_quad = phi * eye_gamma * phi.adjoint();
  double best = 0.0;
  for (int row = 0; row < n; ++row) {
    const double abs_sum = phi_quad.row(row).cwiseAbs().sum();
    const double row_norm = (phi.row(row) * eye_gamma * phi.adjoint()).norm();
    const Mat cross = phi.row(row) * eye_gamma * sg_self.adjoint();
    const double acc =
        (abs_sum + std::sqrt(static_cast<double>(n)) * row_norm) * sigma_norm +
        std::sqrt(weight / l_rx) * cross.norm();
    best = std::max(best, acc);
  }
  return 24.0 * M_PI * M_PI / (geometry.wavelength * geometry.wavelength) * l_rx * best;
}

double DecReport::dec_seconds() const {
  double du_max = 0;
  for (double s : du_seconds) du_max = std::max(du_max, s);
  return cu_seconds + du_max;
}

namespace {

// One distributed unit: a contiguous shard of the transmit array plus the
// per-user factors that touch it.
struct DuNode {
  Positions t;
  std::vector<Box> boxes;
  std::vector<Mat> g;  // K shards, L_tx x M_c
  std::vector<Mat> w, w_prev, w_prev2;
  double seconds = 0;

  void refresh_frm(const std::vector<PathGeometry>& geometry) {
    const int users = static_cast<int>(geometry.size());
    g.resize(users);
    for (int k = 0; k < users; ++k) {
      g[k].resize(geometry[k].num_tx_paths(), t.rows());
      for (int m = 0; m < t.rows(); ++m)
        g[k].col(m) = channel::field_response_vector(geometry[k], channel::Side::Tx,
                                                     t.row(m).transpose());
    }
  }
};

}  // namespace

DecReport dec_solve(const Scenario& scenario, const AntennaLayout& layout,
                    const DecConfig& config) {
  scenario.validate();
  config.solver.validate();
  if (config.position_steps < 1)
    throw std::invalid_argument("dec_solve: position_steps must be >= 1");
  const auto& dims = scenario.dims;
  const int users = dims.num_users;
  const ClusterPlan plan = ClusterPlan::contiguous(dims.num_tx, config.clusters);
  const auto& geometry = scenario.geometry;
  const RealVec& weights = scenario.weights;
  const RealVec& noise = scenario.noise;

  DecReport out;
  out.du_seconds.assign(plan.clusters, 0.0);
  int round = 0;

  const auto timed = [](double& bucket, auto&& fn) {
    const auto start = Clock::now();
    fn();
    bucket += std::chrono::duration<double>(Clock::now() - start).count();
  };
  const auto gather = [&](const char* kind, long cplx, long real) {
    for (int c = 0; c < plan.clusters; ++c)
      out.log.record(round, kind, c + 1, 0, cplx, real);
    ++round;
  };
  const auto bcast = [&](const char* kind, long cplx, long real) {
    for (int c = 0; c < plan.clusters; ++c)
      out.log.record(round, kind, 0, c + 1, cplx, real);
    ++round;
  };

  long sum_ltx = 0;
  for (int k = 0; k < users; ++k) sum_ltx += geometry[k].num_tx_paths();
  const long d = dims.num_streams;

  // --- Static setup (out of band: scenario data and initial state are part of
  // deployment, not the iterative protocol).
  std::vector<DuNode> dus(plan.clusters);
  {
    const double amp =
        std::sqrt(scenario.power_budget / (dims.num_users * dims.num_streams));
    std::vector<Mat> w_init(users, Mat::Zero(dims.num_tx, dims.num_streams));
    for (auto& w : w_init)
      for (int s = 0; s < dims.num_streams; ++s) w(s, s) = amp;
    for (int c = 0; c < plan.clusters; ++c) {
      dus[c].t = layout.tx.middleRows(plan.start(c), plan.rows_per_cluster);
      dus[c].boxes.assign(layout.tx_boxes.begin() + plan.start(c),
                          layout.tx_boxes.begin() + plan.start(c) + plan.rows_per_cluster);
      timed(dus[c].seconds, [&] {
        dus[c].refresh_frm(geometry);
        dus[c].w.resize(users);
        for (int k = 0; k < users; ++k)
          dus[c].w[k] = w_init[k].middleRows(plan.start(c), plan.rows_per_cluster);
        dus[c].w_prev = dus[c].w;
        dus[c].w_prev2 = dus[c].w;
      });
    }
  }

  // CU state.
  std::vector<Positions> rx = layout.rx;
  std::vector<std::vector<Box>> rx_boxes = layout.rx_boxes;
  std::vector<Mat> f(users);
  const auto refresh_f = [&](int k) {
    f[k].resize(geometry[k].num_rx_paths(), rx[k].rows());
    for (int n = 0; n < rx[k].rows(); ++n)
      f[k].col(n) = channel::field_response_vector(geometry[k], channel::Side::Rx,
                                                   rx[k].row(n).transpose());
  };
  for (int k = 0; k < users; ++k)
    timed(out.cu_seconds, [&] { refresh_f(k); });

  std::vector<Mat> gamma(users), phi(users);
  std::vector<std::vector<Mat>> g_tilde(users, std::vector<Mat>(users));

  const auto gather_gtilde = [&] {
    std::vector<std::vector<std::vector<Mat>>> partial(plan.clusters);
    for (int c = 0; c < plan.clusters; ++c)
      timed(dus[c].seconds, [&] {
        partial[c].assign(users, std::vector<Mat>(users));
        for (int k = 0; k < users; ++k)
          for (int j = 0; j < users; ++j)
            partial[c][k][j] = dus[c].g[k] * dus[c].w[j];
      });
    gather("gather_gtilde", static_cast<long>(users) * sum_ltx * d, 0);
    timed(out.cu_seconds, [&] {
      for (int k = 0; k < users; ++k)
        for (int j = 0; j < users; ++j) {
          g_tilde[k][j] = partial[0][k][j];
          for (int c = 1; c < plan.clusters; ++c) g_tilde[k][j] += partial[c][k][j];
        }
    });
  };

  gather_gtilde();

  {
    BeamformerSet budget_only;
    budget_only.power_budget = scenario.power_budget;
    budget_only.weights = weights;
    budget_only.noise = noise;
    out.report.r_max_nats = objective::r_max_bound(dims, geometry, budget_only);
  }
  {
    // Initial trace point needs auxiliaries for f_quad bookkeeping only.
    std::vector<Mat> g0(users), p0(users);
    dec_update_aux(f, geometry, g_tilde, weights, noise, g0, p0);
    out.report.wsr_nats.push_back(
        dec_objective(f, geometry, g_tilde, g0, p0, weights, noise).wsr_nats);
  }

  const solver::SolverConfig& cfg = config.solver;
  for (int iter = 1; iter <= cfg.max_outer; ++iter) {
    solver::BlockTimes bt;
    const double cu_before_aux = out.cu_seconds;

    // --- Auxiliary block at the CU, then broadcast of the derived payloads.
    std::vector<Mat> eta_seeds(users);
    timed(out.cu_seconds, [&] {
      dec_update_aux(f, geometry, g_tilde, weights, noise, gamma, phi);
      out.report.f_quad.push_back(
          dec_objective(f, geometry, g_tilde, gamma, phi, weights, noise).f_quad);
      for (int k = 0; k < users; ++k)
        eta_seeds[k] = eta_seed(f[k], geometry[k], gamma[k], phi[k]);
    });
    bcast("bcast_aux", static_cast<long>(users) * d * d + sum_ltx * d, 0);
    bt.aux_ms = (out.cu_seconds - cu_before_aux) * 1e3;

    // --- Beamformer block: eta by reduction, then the sharded inverse-free
    // update with a global power rescale.
    const double cu_before_w = out.cu_seconds;
    double du_before_w = 0;
    for (const auto& du : dus) du_before_w = std::max(du_before_w, du.seconds);

    std::vector<std::vector<Mat>> ptilde_partial(plan.clusters);
    for (int c = 0; c < plan.clusters; ++c)
      timed(dus[c].seconds, [&] {
        std::vector<Mat> p(users);
        for (int k = 0; k < users; ++k) p[k] = dus[c].g[k].adjoint() * eta_seeds[k];
        ptilde_partial[c].assign(users * users, Mat());
        for (int k = 0; k < users; ++k)
          for (int j = 0; j < users; ++j)
            ptilde_partial[c][k * users + j] = p[k].adjoint() * p[j];
      });
    gather("gather_ptilde", static_cast<long>(users) * users * d * d, 0);
    double eta = 0;
    timed(out.cu_seconds, [&] {
      double acc = 0;
      for (int k = 0; k < users; ++k)
        for (int j = 0; j < users; ++j) {
          Mat sum = ptilde_partial[0][k * users + j];
          for (int c = 1; c < plan.clusters; ++c)
            sum += ptilde_partial[c][k * users + j];
          acc += sum.squaredNorm();
        }
      eta = std::sqrt(acc);
    });

    if (eta > 0) {
      const double nu = fp::extrapolation_weight(iter);
      std::vector<std::vector<Mat>> upsilon(plan.clusters);
      std::vector<std::vector<Mat>> ups_partial(plan.clusters);
      for (int c = 0; c < plan.clusters; ++c)
        timed(dus[c].seconds, [&] {
          upsilon[c].resize(users);
          for (int k = 0; k < users; ++k)
            upsilon[c][k] =
                dus[c].w_prev[k] + nu * (dus[c].w_prev[k] - dus[c].w_prev2[k]);
          ups_partial[c].assign(users * users, Mat());
          for (int j = 0; j < users; ++j)
            for (int k = 0; k < users; ++k)
              ups_partial[c][j * users + k] = dus[c].g[j] * upsilon[c][k];
        });
      gather("gather_upsilon", static_cast<long>(users) * sum_ltx * d, 0);

      std::vector<Mat> linear(users);
      std::vector<std::vector<Mat>> quad(users, std::vector<Mat>(users));
      timed(out.cu_seconds, [&] {
        for (int j = 0; j < users; ++j) {
          linear[j] = geometry[j].path_response.adjoint() * f[j] * phi[j] *
                      (Mat::Identity(d, d) + gamma[j]);
          const Mat back = phi[j].adjoint() * f[j].adjoint() * geometry[j].path_response;
          for (int k = 0; k < users; ++k) {
            Mat ups_tilde = ups_partial[0][j * users + k];
            for (int c = 1; c < plan.clusters; ++c)
              ups_tilde += ups_partial[c][j * users + k];
            quad[j][k] = linear[j] * (back * ups_tilde);
          }
        }
      });
      bcast("bcast_upsilon",
            static_cast<long>(sum_ltx) * d + static_cast<long>(users) * sum_ltx * d, 1);

      std::vector<std::vector<Mat>> q(plan.clusters);
      RealVec power_partial = RealVec::Zero(plan.clusters);
      for (int c = 0; c < plan.clusters; ++c)
        timed(dus[c].seconds, [&] {
          q[c].resize(users);
          for (int k = 0; k < users; ++k) {
            Mat acc = std::sqrt(weights[k]) * (dus[c].g[k].adjoint() * linear[k]);
            for (int j = 0; j < users; ++j)
              acc -= dus[c].g[j].adjoint() * quad[j][k];
            q[c][k] = (acc + eta * upsilon[c][k]) / eta;
            power_partial[c] += q[c][k].squaredNorm();
          }
        });
      gather("gather_power", 0, 1);
      double scale = 1.0;
      timed(out.cu_seconds, [&] {
        const double p_q = power_partial.sum();
        scale = (p_q > 0) ? std::min(std::sqrt(scenario.power_budget / p_q), 1.0) : 1.0;
      });
      bcast("bcast_power", 0, 1);
      for (int c = 0; c < plan.clusters; ++c)
        timed(dus[c].seconds, [&] {
          dus[c].w_prev2 = dus[c].w_prev;
          for (int k = 0; k < users; ++k) dus[c].w[k] = scale * q[c][k];
          dus[c].w_prev = dus[c].w;
        });
    }
    double du_after_w = 0;
    for (const auto& du : dus) du_after_w = std::max(du_after_w, du.seconds);
    bt.w_ms = (out.cu_seconds - cu_before_w + du_after_w - du_before_w) * 1e3;

    // --- Transmit position block.
    const double cu_before_tx = out.cu_seconds;
    double du_before_tx = 0;
    for (const auto& du : dus) du_before_tx = std::max(du_before_tx, du.seconds);
    const int tx_steps = cfg.optimize_tx ? config.position_steps : 0;
    for (int step = 0; step < tx_steps; ++step) {
      gather_gtilde();  // refreshed with the new beamformers / positions

      std::vector<std::vector<Mat>> wtilde_partial(plan.clusters);
      std::vector<RealVec> rn(plan.clusters, RealVec::Zero(users));
      for (int c = 0; c < plan.clusters; ++c)
        timed(dus[c].seconds, [&] {
          wtilde_partial[c].assign(users * users, Mat());
          for (int t = 0; t < users; ++t) {
            rn[c][t] = dus[c].w[t].rowwise().norm().sum();
            for (int s = 0; s < users; ++s)
              wtilde_partial[c][t * users + s] = dus[c].w[t].adjoint() * dus[c].w[s];
          }
        });
      gather("gather_wtilde", static_cast<long>(users) * users * d * d, users);

      std::vector<std::vector<Mat>> w_tilde(users, std::vector<Mat>(users));
      std::vector<Mat> e(users), c_coef_flat(users * users);
      RealVec mid_norms(users), rownorm_sum(users);
      timed(out.cu_seconds, [&] {
        for (int t = 0; t < users; ++t) {
          rownorm_sum[t] = 0;
          for (int c = 0; c < plan.clusters; ++c) rownorm_sum[t] += rn[c][t];
          for (int s = 0; s < users; ++s) {
            w_tilde[t][s] = wtilde_partial[0][t * users + s];
            for (int c = 1; c < plan.clusters; ++c)
              w_tilde[t][s] += wtilde_partial[c][t * users + s];
          }
        }
        for (int k = 0; k < users; ++k) {
          e[k] = phi[k].adjoint() * f[k].adjoint() * geometry[k].path_response;
          const Mat mid =
              e[k].adjoint() * (Mat::Identity(d, d) + gamma[k]) * e[k];
          mid_norms[k] = spectral_norm_hermitian(mid);
          for (int j = 0; j < users; ++j)
            c_coef_flat[k * users + j] = g_tilde[k][j].adjoint() * mid;
        }
      });
      bcast("bcast_tcoeffs",
            static_cast<long>(sum_ltx) * d + static_cast<long>(users) * sum_ltx * d,
            2 * users);

      const double sqrt_m = std::sqrt(static_cast<double>(dims.num_tx));
      RealVec delta_partial = RealVec::Zero(plan.clusters);
      std::vector<Positions> grads(plan.clusters);
      for (int c = 0; c < plan.clusters; ++c)
        timed(dus[c].seconds, [&] {
          const int m_c = static_cast<int>(dus[c].t.rows());
          std::vector<Mat> d_shard(users);
          for (int k = 0; k < users; ++k) {
            Mat acc = std::sqrt(weights[k]) * dus[c].w[k] *
                      (Mat::Identity(d, d) + gamma[k]) * e[k];
            for (int j = 0; j < users; ++j)
              acc -= dus[c].w[j] * c_coef_flat[k * users + j];
            d_shard[k] = std::move(acc);
          }
          grads[c] = Positions::Zero(m_c, 3);
          for (int k = 0; k < users; ++k) {
            const double wavenumber = 2.0 * M_PI / geometry[k].wavelength;
            for (int qi = 0; qi < geometry[k].num_tx_paths(); ++qi) {
              const Vec3 dir = channel::direction_vector(geometry[k].aod_elevation[qi],
                                                         geometry[k].aod_azimuth[qi]);
              for (int m = 0; m < m_c; ++m) {
                const Complex dmq = d_shard[k](m, qi);
                const double xi = std::arg(dmq) +
                                  wavenumber * dir.dot(dus[c].t.row(m).transpose());
                grads[c].row(m) -= (2.0 * wavenumber) * std::abs(dmq) *
                                   std::sin(xi) * dir.transpose();
              }
            }
          }
          for (int m = 0; m < m_c; ++m) {
            double abs_sum_bound = 0.0, row_norm_sq = 0.0;
            for (int t = 0; t < users; ++t) {
              abs_sum_bound += dus[c].w[t].row(m).norm() * rownorm_sum[t];
              for (int s = 0; s < users; ++s)
                row_norm_sq += std::real((dus[c].w[t].row(m) * w_tilde[t][s] *
                                          dus[c].w[s].row(m).adjoint())(0, 0));
            }
            const double row_norm = std::sqrt(std::max(row_norm_sq, 0.0));
            double acc = 0.0;
            for (int k = 0; k < users; ++k) {
              const double l_tx = geometry[k].num_tx_paths();
              const Mat row =
                  dus[c].w[k].row(m) * (Mat::Identity(d, d) + gamma[k]) * e[k];
              acc += l_tx * ((abs_sum_bound + sqrt_m * row_norm) * mid_norms[k] +
                             std::sqrt(weights[k] / l_tx) * row.norm());
            }
            delta_partial[c] = std::max(delta_partial[c], acc);
          }
        });
      gather("gather_delta", 0, 1);
      double delta = 0;
      timed(out.cu_seconds, [&] {
        const double wavelength = geometry[0].wavelength;
        delta = 24.0 * M_PI * M_PI / (wavelength * wavelength) *
                delta_partial.maxCoeff();
      });
      bcast("bcast_delta", 0, 1);
      if (delta > 0) {
        for (int c = 0; c < plan.clusters; ++c)
          timed(dus[c].seconds, [&] {
            dus[c].t += grads[c] / delta;
            for (int m = 0; m < dus[c].t.rows(); ++m)
              dus[c].t.row(m) =
                  dus[c].boxes[m].clamp(dus[c].t.row(m).transpose()).transpose();
            dus[c].refresh_frm(geometry);
          });
      }
    }
    gather_gtilde();  // post-move blocks for the receive side and the trace
    double du_after_tx = 0;
    for (const auto& du : dus) du_after_tx = std::max(du_after_tx, du.seconds);
    bt.tx_ms = (out.cu_seconds - cu_before_tx + du_after_tx - du_before_tx) * 1e3;

    // --- Receive position block, local to the CU.
    const double cu_before_rx = out.cu_seconds;
    timed(out.cu_seconds, [&] {
      const int rx_steps = cfg.optimize_rx ? config.position_steps : 0;
      for (int k = 0; k < users; ++k) {
        for (int step = 0; step < rx_steps; ++step) {
          const double delta = dec_delta_rx(f[k], geometry[k], g_tilde[k], k, gamma[k],
                                            phi[k], weights[k]);
          if (delta <= 0) break;
          const Mat d_rx = dec_rx_derivative(f[k], geometry[k], g_tilde[k], k,
                                             gamma[k], phi[k], weights[k]);
          const double wavenumber = 2.0 * M_PI / geometry[k].wavelength;
          Positions grad = Positions::Zero(rx[k].rows(), 3);
          for (int qi = 0; qi < geometry[k].num_rx_paths(); ++qi) {
            const Vec3 dir = channel::direction_vector(geometry[k].aoa_elevation[qi],
                                                       geometry[k].aoa_azimuth[qi]);
            for (int n = 0; n < rx[k].rows(); ++n) {
              const Complex dnq = d_rx(n, qi);
              const double xi =
                  std::arg(dnq) + wavenumber * dir.dot(rx[k].row(n).transpose());
              grad.row(n) -=
                  (2.0 * wavenumber) * std::abs(dnq) * std::sin(xi) * dir.transpose();
            }
          }
          rx[k] += grad / delta;
          for (int n = 0; n < rx[k].rows(); ++n)
            rx[k].row(n) = rx_boxes[k][n].clamp(rx[k].row(n).transpose()).transpose();
          refresh_f(k);
        }
      }
    });
    bt.rx_ms = (out.cu_seconds - cu_before_rx) * 1e3;

    double wsr = 0;
    timed(out.cu_seconds, [&] {
      wsr = dec_objective(f, geometry, g_tilde, gamma, phi, weights, noise).wsr_nats;
    });
    if (cfg.check_r_max && wsr > out.report.r_max_nats * (1.0 + 1e-9))
      throw NumericalFailure(
          "dec_solve: weighted sum rate exceeded its upper bound at iteration " +
          std::to_string(iter));
    out.report.wsr_nats.push_back(wsr);
    out.report.times.push_back(bt);
    out.report.iterations = iter;
    const double prev = out.report.wsr_nats[out.report.wsr_nats.size() - 2];
    if (std::abs(wsr - prev) < cfg.tol_outer * (1.0 + std::abs(prev))) {
      out.report.converged = true;
      break;
    }
  }

  // Result readout (diagnostic, outside the iterative protocol).
  out.report.final_state.layout.min_separation = layout.min_separation;
  out.report.final_state.layout.tx_boxes = layout.tx_boxes;
  out.report.final_state.layout.rx_boxes = rx_boxes;
  out.report.final_state.layout.tx.resize(dims.num_tx, 3);
  for (int c = 0; c < plan.clusters; ++c)
    out.report.final_state.layout.tx.middleRows(plan.start(c), plan.rows_per_cluster) =
        dus[c].t;
  out.report.final_state.layout.rx = rx;
  out.report.final_state.channels =
      channel::assemble_channels(geometry, out.report.final_state.layout);
  out.report.final_state.beams.power_budget = scenario.power_budget;
  out.report.final_state.beams.weights = weights;
  out.report.final_state.beams.noise = noise;
  out.report.final_state.beams.W.resize(users);
  for (int k = 0; k < users; ++k) {
    std::vector<Mat> shards(plan.clusters);
    for (int c = 0; c < plan.clusters; ++c) shards[c] = dus[c].w[k];
    out.report.final_state.beams.W[k] = stack_shards(shards);
  }
  out.report.final_state.aux.gamma = gamma;
  out.report.final_state.aux.phi = phi;
  out.report.total_ms = (out.cu_seconds + [&] {
                          double m = 0;
                          for (const auto& du : dus) m = std::max(m, du.seconds);
                          return m;
                        }()) *
                        1e3;
  for (int c = 0; c < plan.clusters; ++c) out.du_seconds[c] = dus[c].seconds;
  return out;
}

}  // namespace fawsr::dbp
