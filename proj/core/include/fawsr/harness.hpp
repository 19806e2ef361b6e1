#pragma once

#include <optional>
#include <random>

#include "fawsr/dbp.hpp"

namespace fawsr::harness {

/// Statistical description of a simulated deployment. `sample(i)` draws the
/// i-th realization deterministically from (seed, i): per-user link distance
/// with the squared distance uniform in [dist_min^2, dist_max^2], all path
/// angles uniform in [0, pi), and a diagonal path-response matrix with i.i.d.
/// circularly-symmetric Gaussian entries of variance pathloss/num_paths.
struct ScenarioSpec {
  int num_tx = 16;
  int num_rx = 4;
  int num_users = 6;
  int num_streams = 4;
  int num_clusters = 4;
  int num_paths = 3;            // shared by both sides (diagonal coupling)
  double carrier_hz = 28e9;
  double rho = 2.0;             // movable-box pitch in wavelengths
  double min_sep_wavelengths = 0.5;
  double power_dbm = 30.0;
  double noise_dbm = -90.0;
  double dist_min_m = 100.0;
  double dist_max_m = 300.0;
  double pathloss_exp = 3.67;
  double ref_loss_db = -61.4;   // pathloss at the 1 m reference distance
  std::uint64_t seed = 1;

  double wavelength() const { return 299792458.0 / carrier_hz; }
  double pathloss(double distance_m) const;
  Scenario sample(int realization) const;
};

/// Independent deterministic RNG stream for (seed, realization, purpose).
std::mt19937_64 rng_stream(std::uint64_t seed, int realization, std::uint64_t purpose);

// ---------------------------------------------------------------------------
// Antenna-placement baselines.

enum class BaselineKind {
  FPA,   // fixed half-wavelength arrays on both sides
  RPA,   // positions drawn uniformly in the movable boxes, then frozen
  TFA,   // transmit side optimized, receive side fixed
  RFA,   // receive side optimized, transmit side fixed
  TRFA,  // both sides optimized
};

std::string to_string(BaselineKind kind);
BaselineKind baseline_from_string(const std::string& name);

/// Initial layout for a baseline; RPA additionally needs a random stream.
AntennaLayout baseline_layout(const Scenario& scenario, BaselineKind kind,
                              std::mt19937_64* rng);

/// Whether the solver should move each side for the baseline.
bool optimizes_tx(BaselineKind kind);
bool optimizes_rx(BaselineKind kind);

// ---------------------------------------------------------------------------
// Imperfect channel knowledge: the optimizer sees a perturbed copy of the
// geometry, the resulting design is then scored on the true channels.

struct PerturbationSpec {
  double angle_std = 0.0;    // radians, additive Gaussian on every angle
  double prm_rel_std = 0.0;  // relative complex Gaussian on the path responses

  bool active() const { return angle_std > 0 || prm_rel_std > 0; }
};

Scenario perturb(const Scenario& truth, const PerturbationSpec& spec,
                 std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Monte Carlo driver.

struct RunResult {
  double wsr_bits = 0.0;   // scored on the true channels
  int iterations = 0;
  bool converged = false;
  double seconds = 0.0;        // modeled wall clock (dec: CU + slowest DU)
  long payload_bytes = 0;      // decentralized runs only
};

/// One realization end to end. `clusters` = 0 runs the centralized solver.
RunResult run_one(const ScenarioSpec& spec, int realization, BaselineKind kind,
                  const solver::SolverConfig& config, int clusters,
                  const PerturbationSpec& perturbation);

struct BaselineStats {
  BaselineKind kind = BaselineKind::FPA;
  int realizations = 0;
  int failures = 0;            // numerical failures, excluded from the means
  double mean_bits = 0.0;
  double std_bits = 0.0;
  double mean_iterations = 0.0;
  double mean_seconds = 0.0;
  double mean_payload_bytes = 0.0;
};

struct ExperimentConfig {
  ScenarioSpec spec;
  std::vector<BaselineKind> baselines{BaselineKind::FPA, BaselineKind::TRFA};
  int realizations = 50;
  solver::SolverConfig solver;
  int clusters = 0;            // 0 = centralized
  PerturbationSpec perturbation;
};

std::vector<BaselineStats> run_experiment(const ExperimentConfig& config);

/// CSV schema: baseline,realizations,failures,mean_bits,std_bits,
/// mean_iterations,mean_payload_bytes. Header-only when empty. Wall-clock
/// means are kept out of the file so identical seeds reproduce it byte for
/// byte.
void write_stats_csv(const std::filesystem::path& path,
                     const std::vector<BaselineStats>& stats);

}  // namespace fawsr::harness
