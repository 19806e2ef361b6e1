// fawsr command-line front end: solve a scenario file, run experiment sweeps,
// or execute the invariant verification suites.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "fawsr/harness.hpp"
#include "verify.hpp"

namespace fs = std::filesystem;
using namespace fawsr;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitMaxIterations = 2;
constexpr int kExitUsage = 64;

fs::path default_out_dir() {
  if (const char* env = std::getenv("FAWSR_OUT_DIR")) return fs::path(env);
  return fs::path(".");
}

struct SolveArgs {
  std::string scenario_path;
  std::string mode = "c";
  int clusters = 0;  // 0 = from scenario dims
  std::string baseline = "fpa";
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir;
  int max_outer = 80;
  double tol = 1e-4;
};

int cmd_solve(const SolveArgs& args) {
  Scenario scenario = io::load(args.scenario_path);
  if (args.seed_set) scenario.seed = args.seed;
  if (args.clusters > 0) scenario.dims.num_clusters = args.clusters;
  scenario.dims.validate();

  const auto kind = harness::baseline_from_string(args.baseline);
  auto rng = harness::rng_stream(scenario.seed, 0, 0x7a11c0deull);
  const AntennaLayout initial = harness::baseline_layout(scenario, kind, &rng);

  solver::SolverConfig config;
  config.max_outer = args.max_outer;
  config.tol_outer = args.tol;
  config.optimize_tx = harness::optimizes_tx(kind);
  config.optimize_rx = harness::optimizes_rx(kind);

  const fs::path out = args.out_dir.empty() ? default_out_dir() : fs::path(args.out_dir);
  fs::create_directories(out);

  solver::SolverReport report;
  long payload_bytes = 0;
  if (args.mode == "d") {
    dbp::DecConfig dec;
    dec.clusters = scenario.dims.num_clusters;
    dec.solver = config;
    dec.solver.beamformer = solver::BeamformerUpdate::InverseFree;
    dec.solver.mirror_decentralized = true;
    auto rep = dbp::dec_solve(scenario, initial, dec);
    rep.log.write_csv(out / "messages.csv");
    std::ofstream(out / "messages_summary.json") << rep.log.summary_json() << '\n';
    payload_bytes = rep.log.total_bytes();
    report = std::move(rep.report);
  } else {
    report = solver::solve(scenario, initial, config);
  }

  report.write_json(out / "report.json");
  report.write_trace_csv(out / "trace.csv");

  std::cout << "solve status=" << (report.converged ? "converged" : "max-iterations")
            << " mode=" << args.mode << " baseline=" << harness::to_string(kind)
            << " iterations=" << report.iterations
            << " wsr_bits=" << report.final_wsr_bits()
            << " payload_bytes=" << payload_bytes << " out=" << out.string() << '\n';
  return report.converged ? kExitOk : kExitMaxIterations;
}

struct ExperimentArgs {
  bool table2 = false;
  bool table3 = false;
  std::string fig;
  int realizations = 50;
  std::string out_dir;
  std::uint64_t seed = 1;
  int num_tx = 16;
};

std::vector<harness::BaselineKind> all_baselines() {
  return {harness::BaselineKind::FPA, harness::BaselineKind::RPA,
          harness::BaselineKind::TFA, harness::BaselineKind::RFA,
          harness::BaselineKind::TRFA};
}

void write_sweep_csv(const fs::path& path, const std::string& param,
                     const std::vector<std::pair<double, std::vector<harness::BaselineStats>>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << param << ",baseline,realizations,failures,mean_bits,std_bits\n";
  out.precision(17);
  for (const auto& [value, stats] : rows)
    for (const auto& s : stats)
      out << value << ',' << harness::to_string(s.kind) << ',' << s.realizations
          << ',' << s.failures << ',' << s.mean_bits << ',' << s.std_bits << '\n';
}

int cmd_experiment(const ExperimentArgs& args) {
  const fs::path out = args.out_dir.empty() ? default_out_dir() : fs::path(args.out_dir);
  fs::create_directories(out);

  harness::ExperimentConfig base;
  base.spec.num_tx = args.num_tx;
  base.spec.seed = args.seed;
  base.realizations = args.realizations;

  if (args.table2) {
    base.baselines = all_baselines();
    const auto stats = harness::run_experiment(base);
    harness::write_stats_csv(out / "table2.csv", stats);
    std::cout << "experiment name=table2 rows=" << stats.size()
              << " out=" << (out / "table2.csv").string() << '\n';
    return kExitOk;
  }

  if (args.table3) {
    // Centralized vs decentralized wall time for the larger array.
    harness::ExperimentConfig big = base;
    big.spec.num_tx = 64;
    big.spec.num_clusters = 4;
    big.baselines = {harness::BaselineKind::TRFA};
    big.solver.beamformer = solver::BeamformerUpdate::InverseFree;
    big.solver.mirror_decentralized = true;
    const auto central = harness::run_experiment(big);
    big.clusters = 4;
    const auto dec = harness::run_experiment(big);
    std::ofstream csv(out / "table3.csv");
    csv << "mode,mean_seconds,mean_payload_bytes,time_saved_pct\n";
    csv.precision(17);
    const double cen_s = central[0].mean_seconds, dec_s = dec[0].mean_seconds;
    const double saved = cen_s > 0 ? 100.0 * (cen_s - dec_s) / cen_s : 0.0;
    csv << "centralized," << cen_s << ",0,0\n";
    csv << "decentralized," << dec_s << ',' << dec[0].mean_payload_bytes << ','
        << saved << '\n';
    std::cout << "experiment name=table3 time_saved_pct=" << saved
              << " out=" << (out / "table3.csv").string() << '\n';
    return kExitOk;
  }

  if (args.fig == "power") {
    std::vector<std::pair<double, std::vector<harness::BaselineStats>>> rows;
    base.baselines = {harness::BaselineKind::FPA, harness::BaselineKind::TFA,
                      harness::BaselineKind::TRFA};
    for (double dbm : {30.0, 35.0, 40.0}) {
      base.spec.power_dbm = dbm;
      rows.emplace_back(dbm, harness::run_experiment(base));
    }
    write_sweep_csv(out / "fig_power.csv", "power_dbm", rows);
    std::cout << "experiment name=fig-power rows=" << rows.size()
              << " out=" << (out / "fig_power.csv").string() << '\n';
    return kExitOk;
  }

  if (args.fig == "users") {
    std::vector<std::pair<double, std::vector<harness::BaselineStats>>> rows;
    base.baselines = {harness::BaselineKind::FPA, harness::BaselineKind::TRFA};
    for (int users : {2, 4, 6}) {
      base.spec.num_users = users;
      rows.emplace_back(users, harness::run_experiment(base));
    }
    write_sweep_csv(out / "fig_users.csv", "num_users", rows);
    std::cout << "experiment name=fig-users rows=" << rows.size()
              << " out=" << (out / "fig_users.csv").string() << '\n';
    return kExitOk;
  }

  if (args.fig == "rho") {
    std::vector<std::pair<double, std::vector<harness::BaselineStats>>> rows;
    base.baselines = {harness::BaselineKind::TRFA};
    for (double rho : {0.5, 1.0, 2.0}) {
      base.spec.rho = rho;
      rows.emplace_back(rho, harness::run_experiment(base));
    }
    write_sweep_csv(out / "fig_rho.csv", "rho", rows);
    std::cout << "experiment name=fig-rho rows=" << rows.size()
              << " out=" << (out / "fig_rho.csv").string() << '\n';
    return kExitOk;
  }

  if (args.fig == "robust-ang" || args.fig == "robust-prm") {
    const bool angles = args.fig == "robust-ang";
    std::vector<std::pair<double, std::vector<harness::BaselineStats>>> rows;
    base.baselines = {harness::BaselineKind::FPA, harness::BaselineKind::TFA,
                      harness::BaselineKind::TRFA};
    const std::vector<double> levels =
        angles ? std::vector<double>{0.0, 0.02, 0.05} : std::vector<double>{0.0, 0.5, 1.0};
    for (double level : levels) {
      base.perturbation = {};
      (angles ? base.perturbation.angle_std : base.perturbation.prm_rel_std) = level;
      rows.emplace_back(level, harness::run_experiment(base));
    }
    const fs::path path = out / (angles ? "fig_robust_ang.csv" : "fig_robust_prm.csv");
    write_sweep_csv(path, angles ? "angle_std_rad" : "prm_rel_std", rows);
    std::cout << "experiment name=fig-" << (angles ? "robust-ang" : "robust-prm")
              << " rows=" << rows.size() << " out=" << path.string() << '\n';
    return kExitOk;
  }

  if (args.fig == "convergence") {
    bool all_converged = true;
    for (auto kind : all_baselines()) {
      if (kind == harness::BaselineKind::RPA) continue;
      const Scenario scenario = base.spec.sample(0);
      auto rng = harness::rng_stream(base.spec.seed, 0, 0x7a11c0deull);
      const AntennaLayout initial = harness::baseline_layout(scenario, kind, &rng);
      solver::SolverConfig config = base.solver;
      config.optimize_tx = harness::optimizes_tx(kind);
      config.optimize_rx = harness::optimizes_rx(kind);
      const auto report = solver::solve(scenario, initial, config);
      all_converged = all_converged && report.converged;
      report.write_trace_csv(
          out / ("fig_convergence_" + harness::to_string(kind) + ".csv"));
    }
    std::cout << "experiment name=fig-convergence all_converged="
              << (all_converged ? "true" : "false") << " out=" << out.string() << '\n';
    return all_converged ? kExitOk : kExitMaxIterations;
  }

  std::cerr << "experiment: pick one of --table2, --table3, --fig NAME\n";
  return kExitUsage;
}

int cmd_verify(const std::string& suite, std::uint64_t seed) {
  std::vector<std::string> names =
      suite.empty() ? verify::suite_names() : std::vector<std::string>{suite};
  bool all_passed = true;
  for (const auto& name : names) {
    const auto result = verify::run_suite(name, seed);
    all_passed = all_passed && result.passed;
    std::cerr << "suite " << result.name << ": "
              << (result.passed ? "pass" : "FAIL") << " margin=" << result.margin
              << " (" << result.description << ")\n";
  }
  std::cout << "verify suites=" << names.size()
            << " status=" << (all_passed ? "pass" : "fail") << '\n';
  return all_passed ? kExitOk : kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"joint beamforming and movable-antenna position optimization"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve", "run one scenario file");
  solve->add_option("--scenario", solve_args.scenario_path, "scenario JSON path")
      ->required()
      ->check(CLI::ExistingFile);
  solve->add_option("--mode", solve_args.mode, "c (centralized) or d (decentralized)")
      ->check(CLI::IsMember({"c", "d"}));
  solve->add_option("--clusters", solve_args.clusters, "DU count (decentralized)")
      ->check(CLI::PositiveNumber);
  solve->add_option("--baseline", solve_args.baseline, "fpa|rpa|tfa|rfa|trfa")
      ->check(CLI::IsMember({"fpa", "rpa", "tfa", "rfa", "trfa"}));
  auto* seed_opt = solve->add_option("--seed", solve_args.seed, "override scenario seed");
  solve->add_option("--out", solve_args.out_dir, "output directory");
  solve->add_option("--max-outer", solve_args.max_outer, "outer iteration cap")
      ->check(CLI::PositiveNumber);
  solve->add_option("--tol", solve_args.tol, "relative WSR convergence tolerance")
      ->check(CLI::PositiveNumber);

  ExperimentArgs exp_args;
  auto* experiment = app.add_subcommand("experiment", "Monte Carlo sweeps");
  experiment->add_flag("--table2", exp_args.table2, "baseline comparison table");
  experiment->add_flag("--table3", exp_args.table3, "centralized vs decentralized timing");
  experiment->add_option("--fig", exp_args.fig,
                         "power|users|rho|robust-ang|robust-prm|convergence")
      ->check(CLI::IsMember(
          {"power", "users", "rho", "robust-ang", "robust-prm", "convergence"}));
  experiment->add_option("--realizations", exp_args.realizations, "channel draws per point");
  experiment->add_option("--out", exp_args.out_dir, "output directory");
  experiment->add_option("--seed", exp_args.seed, "experiment seed");
  experiment->add_option("--num-tx", exp_args.num_tx, "transmit antenna count")
      ->check(CLI::PositiveNumber);

  std::string verify_suite;
  std::uint64_t verify_seed = 1;
  auto* verify_cmd = app.add_subcommand("verify", "invariant suites");
  verify_cmd->add_option("--suite", verify_suite,
                         "grad-tx|grad-rx|majorization|delta|tightness|mul (default: all)");
  verify_cmd->add_option("--seed", verify_seed, "suite seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*solve) {
      solve_args.seed_set = seed_opt->count() > 0;
      return cmd_solve(solve_args);
    }
    if (*experiment) {
      if (exp_args.realizations <= 0) {
        std::cerr << "experiment: --realizations must be positive\n";
        return kExitUsage;
      }
      return cmd_experiment(exp_args);
    }
    if (*verify_cmd) {
      if (!verify_suite.empty()) {
        const auto known = verify::suite_names();
        if (std::find(known.begin(), known.end(), verify_suite) == known.end()) {
          std::cerr << "verify: unknown suite " << verify_suite << '\n';
          return kExitUsage;
        }
      }
      return cmd_verify(verify_suite, verify_seed);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitUsage;
}
