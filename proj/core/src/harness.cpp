#include "fawsr/harness.hpp"

#include <cmath>
#include <fstream>

#include "fawsr/channel.hpp"
#include "fawsr/objective.hpp"

namespace fawsr::harness {

namespace {

// splitmix64: cheap, well-distributed mixing for stream derivation.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

std::mt19937_64 rng_stream(std::uint64_t seed, int realization, std::uint64_t purpose) {
  const std::uint64_t s =
      mix(mix(seed) ^ mix(static_cast<std::uint64_t>(realization) + 0x51ed2701ull) ^
          mix(purpose));
  return std::mt19937_64(s);
}

double ScenarioSpec::pathloss(double distance_m) const {
  return io::db_to_linear(ref_loss_db) * std::pow(distance_m, -pathloss_exp);
}

Scenario ScenarioSpec::sample(int realization) const {
  Scenario s;
  s.dims.num_tx = num_tx;
  s.dims.num_rx = num_rx;
  s.dims.num_users = num_users;
  s.dims.num_streams = num_streams;
  s.dims.num_clusters = num_clusters;
  s.wavelength = wavelength();
  s.box_scale = rho;
  s.min_separation = min_sep_wavelengths * s.wavelength;
  s.power_budget = io::dbm_to_watt(power_dbm);
  s.noise = RealVec::Constant(num_users, io::dbm_to_watt(noise_dbm));
  s.weights = RealVec::Ones(num_users);
  s.seed = seed;

  auto rng = rng_stream(seed, realization, /*purpose=*/0x5ce7a110ull);
  std::uniform_real_distribution<double> sq_dist(dist_min_m * dist_min_m,
                                                 dist_max_m * dist_max_m);
  std::uniform_real_distribution<double> angle(0.0, M_PI);
  std::normal_distribution<double> unit_normal(0.0, 1.0);

  s.distances_m = RealVec::Zero(num_users);
  s.geometry.resize(num_users);
  for (int k = 0; k < num_users; ++k) {
    const double d = std::sqrt(sq_dist(rng));
    s.distances_m[k] = d;

    PathGeometry& g = s.geometry[k];
    g.wavelength = s.wavelength;
    g.aod_elevation = RealVec::Zero(num_paths);
    g.aod_azimuth = RealVec::Zero(num_paths);
    g.aoa_elevation = RealVec::Zero(num_paths);
    g.aoa_azimuth = RealVec::Zero(num_paths);
    for (int l = 0; l < num_paths; ++l) {
      g.aod_elevation[l] = angle(rng);
      g.aod_azimuth[l] = angle(rng);
      g.aoa_elevation[l] = angle(rng);
      g.aoa_azimuth[l] = angle(rng);
    }
    // Diagonal coupling: path l departs and arrives along its own angle pair.
    const double per_path_var = pathloss(d) / num_paths;
    const double amp = std::sqrt(per_path_var / 2.0);
    g.path_response = Mat::Zero(num_paths, num_paths);
    for (int l = 0; l < num_paths; ++l)
      g.path_response(l, l) = Complex(amp * unit_normal(rng), amp * unit_normal(rng));
  }
  s.validate();
  return s;
}

std::string to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::FPA: return "FPA";
    case BaselineKind::RPA: return "RPA";
    case BaselineKind::TFA: return "TFA";
    case BaselineKind::RFA: return "RFA";
    case BaselineKind::TRFA: return "TRFA";
  }
  throw std::invalid_argument("unknown baseline kind");
}

BaselineKind baseline_from_string(const std::string& name) {
  if (name == "FPA" || name == "fpa") return BaselineKind::FPA;
  if (name == "RPA" || name == "rpa") return BaselineKind::RPA;
  if (name == "TFA" || name == "tfa") return BaselineKind::TFA;
  if (name == "RFA" || name == "rfa") return BaselineKind::RFA;
  if (name == "TRFA" || name == "trfa") return BaselineKind::TRFA;
  throw std::invalid_argument("unknown baseline: " + name);
}

bool optimizes_tx(BaselineKind kind) {
  return kind == BaselineKind::TFA || kind == BaselineKind::TRFA;
}

bool optimizes_rx(BaselineKind kind) {
  return kind == BaselineKind::RFA || kind == BaselineKind::TRFA;
}

AntennaLayout baseline_layout(const Scenario& scenario, BaselineKind kind,
                              std::mt19937_64* rng) {
  switch (kind) {
    case BaselineKind::FPA:
      return layout::build(scenario, false, false);
    case BaselineKind::TFA:
      return layout::build(scenario, true, false);
    case BaselineKind::RFA:
      return layout::build(scenario, false, true);
    case BaselineKind::TRFA:
      return layout::build(scenario, true, true);
    case BaselineKind::RPA: {
      if (rng == nullptr)
        throw PreconditionViolation("RPA layout needs a random stream");
      AntennaLayout l = layout::build(scenario, true, true);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      auto draw = [&](const Box& box) {
        Vec3 p;
        for (int i = 0; i < 3; ++i)
          p[i] = box.lo[i] + u(*rng) * (box.hi[i] - box.lo[i]);
        return p;
      };
      for (int m = 0; m < l.tx.rows(); ++m)
        l.tx.row(m) = draw(l.tx_boxes[m]).transpose();
      for (size_t k = 0; k < l.rx.size(); ++k)
        for (int n = 0; n < l.rx[k].rows(); ++n)
          l.rx[k].row(n) = draw(l.rx_boxes[k][n]).transpose();
      return l;
    }
  }
  throw std::invalid_argument("unknown baseline kind");
}

Scenario perturb(const Scenario& truth, const PerturbationSpec& spec,
                 std::mt19937_64& rng) {
  Scenario noisy = truth;
  if (!spec.active()) return noisy;
  std::normal_distribution<double> unit_normal(0.0, 1.0);
  for (auto& g : noisy.geometry) {
    if (spec.angle_std > 0) {
      auto jitter = [&](RealVec& v) {
        for (int i = 0; i < v.size(); ++i) v[i] += spec.angle_std * unit_normal(rng);
      };
      jitter(g.aod_elevation);
      jitter(g.aod_azimuth);
      jitter(g.aoa_elevation);
      jitter(g.aoa_azimuth);
    }
    if (spec.prm_rel_std > 0) {
      const double scale = g.path_response.norm() /
                           std::sqrt(2.0 * g.path_response.size());
      for (int r = 0; r < g.path_response.rows(); ++r)
        for (int c = 0; c < g.path_response.cols(); ++c)
          g.path_response(r, c) += spec.prm_rel_std * scale *
                                   Complex(unit_normal(rng), unit_normal(rng));
    }
  }
  return noisy;
}

RunResult run_one(const ScenarioSpec& spec, int realization, BaselineKind kind,
                  const solver::SolverConfig& config, int clusters,
                  const PerturbationSpec& perturbation) {
  Scenario truth = spec.sample(realization);
  if (clusters > 0) truth.dims.num_clusters = clusters;
  truth.dims.validate();

  Scenario design = truth;
  if (perturbation.active()) {
    auto rng = rng_stream(spec.seed, realization, /*purpose=*/0x9e27b4c3ull);
    design = perturb(truth, perturbation, rng);
  }

  auto layout_rng = rng_stream(spec.seed, realization, /*purpose=*/0x7a11c0deull);
  const AntennaLayout initial = baseline_layout(design, kind, &layout_rng);

  solver::SolverConfig run_config = config;
  run_config.optimize_tx = optimizes_tx(kind);
  run_config.optimize_rx = optimizes_rx(kind);

  RunResult result;
  solver::SolverState final_state;
  if (clusters > 0) {
    dbp::DecConfig dec;
    dec.clusters = clusters;
    dec.solver = run_config;
    dec.solver.beamformer = solver::BeamformerUpdate::InverseFree;
    dec.solver.mirror_decentralized = true;
    auto rep = dbp::dec_solve(design, initial, dec);
    result.iterations = rep.report.iterations;
    result.converged = rep.report.converged;
    result.seconds = rep.dec_seconds();
    result.payload_bytes = rep.log.total_bytes();
    final_state = std::move(rep.report.final_state);
  } else {
    auto rep = solver::solve(design, initial, run_config);
    result.iterations = rep.iterations;
    result.converged = rep.converged;
    result.seconds = rep.total_ms / 1000.0;
    final_state = std::move(rep.final_state);
  }

  // Score the design on the true channels.
  const ChannelSet channels =
      channel::assemble_channels(truth.geometry, final_state.layout);
  BeamformerSet beams = final_state.beams;
  beams.weights = truth.weights;
  beams.noise = truth.noise;
  result.wsr_bits = objective::nats_to_bits(objective::wsr(channels, beams));
  return result;
}

std::vector<BaselineStats> run_experiment(const ExperimentConfig& config) {
  std::vector<BaselineStats> out;
  out.reserve(config.baselines.size());
  for (BaselineKind kind : config.baselines) {
    BaselineStats stats;
    stats.kind = kind;
    std::vector<double> bits;
    double iter_sum = 0, sec_sum = 0, byte_sum = 0;
    for (int i = 0; i < config.realizations; ++i) {
      ++stats.realizations;
      try {
        const RunResult r = run_one(config.spec, i, kind, config.solver,
                                    config.clusters, config.perturbation);
        bits.push_back(r.wsr_bits);
        iter_sum += r.iterations;
        sec_sum += r.seconds;
        byte_sum += static_cast<double>(r.payload_bytes);
      } catch (const NumericalFailure&) {
        ++stats.failures;
      }
    }
    const int ok = static_cast<int>(bits.size());
    if (ok > 0) {
      double sum = 0;
      for (double b : bits) sum += b;
      stats.mean_bits = sum / ok;
      double var = 0;
      for (double b : bits) var += (b - stats.mean_bits) * (b - stats.mean_bits);
      stats.std_bits = ok > 1 ? std::sqrt(var / (ok - 1)) : 0.0;
      stats.mean_iterations = iter_sum / ok;
      stats.mean_seconds = sec_sum / ok;
      stats.mean_payload_bytes = byte_sum / ok;
    }
    out.push_back(stats);
  }
  return out;
}

void write_stats_csv(const std::filesystem::path& path,
                     const std::vector<BaselineStats>& stats) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write stats: " + path.string());
  // Wall-clock means are deliberately not serialized: the result file must be
  // byte-identical across repeated runs with the same seed. Timing lives in
  // BaselineStats::mean_seconds and the dedicated timing outputs.
  out << "baseline,realizations,failures,mean_bits,std_bits,mean_iterations,"
         "mean_payload_bytes\n";
  out.precision(17);
  for (const auto& s : stats)
    out << to_string(s.kind) << ',' << s.realizations << ',' << s.failures << ','
        << s.mean_bits << ',' << s.std_bits << ',' << s.mean_iterations << ','
        << s.mean_payload_bytes << '\n';
}

}  // namespace fawsr::harness
