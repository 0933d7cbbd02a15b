// mixrough: experiment runner for mixed / rough SDE simulations.
//
//   mixrough <rate|wongzakai|equivalence|covcheck|simulate> [--config FILE] [--key value ...]
//
// Exit codes: 0 = ran and every built-in check passed, 2 = ran but a check failed
// (reports are still written), 1 = configuration or contract error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mixrough/mixrough.hpp"

namespace {

using namespace mixrough;

std::vector<double> dyadic(int from, int to, bool inverse) {
  std::vector<double> v;
  for (int e = from; e <= to; ++e) v.push_back(inverse ? std::ldexp(1.0, -e) : std::ldexp(1.0, e));
  return v;
}

// Defaults that depend on the experiment kind, applied only to keys the user left unset.
void apply_defaults(ExperimentSpec& spec, const CLI::App& app) {
  auto unset = [&](const char* name) { return app.get_option(name)->count() == 0; };
  if (spec.kind == "rate") {
    if (unset("--steps")) spec.steps = dyadic(4, 9, true);
    if (unset("--M")) spec.paths = 1000;
  } else if (spec.kind == "wongzakai") {
    if (unset("--steps")) spec.steps = dyadic(3, 8, false);
    if (unset("--M")) spec.paths = 200;
    if (unset("--H")) spec.hurst = 0.8;
    if (unset("--N")) spec.grid_steps = 4096;
  } else if (spec.kind == "equivalence") {
    if (unset("--steps")) spec.steps = dyadic(6, 10, true);
    if (unset("--M")) spec.paths = 100;
  } else if (spec.kind == "covcheck") {
    if (unset("--M")) spec.paths = 20000;
    if (unset("--N")) spec.grid_steps = 1024;
  } else if (spec.kind == "simulate") {
    if (unset("--N")) spec.grid_steps = 1024;
  }
}

void print_checks(const std::vector<Check>& checks) {
  for (const auto& c : checks) std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
}

int run_simulate_command(const ExperimentSpec& spec, bool dump) {
  const Trajectory traj = run_simulate(spec);
  const std::filesystem::path dir(spec.out_dir);
  std::filesystem::create_directories(dir);
  const std::string stem = report_stem(spec);
  const SamplePath& x = traj.output.solution;
  {
    std::ofstream csv(dir / (stem + ".csv"));
    if (!csv) throw ContractError("cannot write trajectory CSV");
    csv << "t";
    for (std::size_t c = 0; c < x.components(); ++c) csv << ",x" << c;
    csv << "\n";
    char buf[64];
    for (std::size_t k = 0; k < x.grid().nodes(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", x.grid().time(k));
      csv << buf;
      for (std::size_t c = 0; c < x.components(); ++c) {
        std::snprintf(buf, sizeof buf, ",%.17g", x(k, c));
        csv << buf;
      }
      csv << "\n";
    }
  }
  if (dump) {
    const RngSeed seed{spec.seed, 0};
    write_path_file((dir / (stem + "_W.bin")).string(), traj.brownian, std::nullopt, seed);
    write_path_file((dir / (stem + "_B.bin")).string(), traj.fractional, spec.hurst, seed);
    write_path_file((dir / (stem + "_X.bin")).string(), x, std::nullopt, seed);
  }
  std::cout << to_string(traj.scheme) << " trajectory of '" << spec.model << "' written to "
            << (dir / (stem + ".csv")).string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and convergence experiments for SDEs driven by Brownian motion and fBm (H > 1/2)"};
  app.set_config("--config", "", "Key-value (TOML/INI) file; command-line flags override its keys");
  app.require_subcommand(1);
  app.fallthrough();

  ExperimentSpec spec;
  bool dump_paths = false;
  std::string model_help = "Model identifier:";
  for (const auto& n : zoo::names()) model_help += " " + n;
  app.add_option("--model", spec.model, model_help)->capture_default_str();
  app.add_option("--H", spec.hurst, "Hurst index in (1/2, 1)")->capture_default_str();
  app.add_option("--T", spec.horizon, "Time horizon")->capture_default_str();
  app.add_option("--steps", spec.steps, "Step sizes (rate, equivalence) or smoothing indices n (wongzakai)");
  app.add_option("--M", spec.paths, "Monte Carlo paths")->capture_default_str();
  app.add_option("--gamma", spec.gamma, "Hölder exponent gamma")->capture_default_str();
  app.add_option("--gamma_prime", spec.gamma_prime, "Auxiliary exponent gamma' in (gamma, H)")->capture_default_str();
  app.add_option("--seed", spec.seed, "Master seed")->capture_default_str();
  app.add_option("--out_dir", spec.out_dir, "Output directory")->capture_default_str();
  app.add_option("--N", spec.grid_steps, "Grid steps (wongzakai, covcheck, simulate)");
  app.add_option("--refine", spec.refine, "Reference refinement over the scheme grid")->capture_default_str();
  app.add_option("--fine_factor", spec.fine_factor, "Driver refinement used to build Levy areas")
      ->capture_default_str();
  app.add_option("--scheme", spec.scheme, "rate: natural|skewed; simulate: natural|skewed|smoothed|milstein")
      ->capture_default_str();
  app.add_option("--smoothing", spec.smoothing, "Smoothing index n for simulate --scheme smoothed")
      ->capture_default_str();
  app.add_option("--slope_tol", spec.slope_tolerance, "Allowed |fitted - expected| slope (rate)")
      ->capture_default_str();
  app.add_option("--wz_slack", spec.wongzakai_slack, "Slack on the Wong-Zakai decay bound")->capture_default_str();
  app.add_option("--z_threshold", spec.z_threshold, "Covariance z-score threshold")->capture_default_str();
  app.add_option("--equivalence_factor", spec.equivalence_factor, "Allowed ratio between scheme errors")
      ->capture_default_str();
  app.add_flag("--negative_control", spec.negative_control, "covcheck: shuffle increments (test of the test)");
  app.add_flag("--dump-paths,--dump_paths", dump_paths, "simulate: also write binary dumps of W, B and X");

  for (const char* kind : {"rate", "wongzakai", "equivalence", "covcheck", "simulate"}) {
    app.add_subcommand(kind, std::string("Run the ") + kind + " experiment");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  spec.kind = app.get_subcommands().front()->get_name();
  apply_defaults(spec, app);

  try {
    if (spec.kind == "simulate") return run_simulate_command(spec, dump_paths);
    if (spec.kind == "covcheck") {
      const CovcheckReport report = run_covcheck(spec);
      const auto file = write_report(report);
      for (const auto& e : report.entries) {
        std::printf("cov(B_%.4g, B_%.4g): empirical %.6f exact %.6f z %+.2f\n", e.s, e.t, e.empirical, e.exact, e.z);
      }
      print_checks(report.checks);
      std::cout << "report: " << file.string() << "\n";
      return report.passed() ? 0 : 2;
    }
    RateReport report;
    if (spec.kind == "rate") report = run_rate(spec);
    if (spec.kind == "wongzakai") report = run_wongzakai(spec);
    if (spec.kind == "equivalence") report = run_equivalence(spec);
    const auto file = write_report(report);
    for (const auto& s : report.series) {
      std::printf("%s: slope %.4f (stderr %.4f)\n", s.name.c_str(), s.fit.slope, s.fit.std_error);
      for (const auto& r : s.records) {
        std::printf("  level %-12.6g rms %.6e mean %.6e stderr %.2e median %.6e\n", r.level, r.rms, r.mean,
                    r.std_error, r.median);
      }
    }
    print_checks(report.checks);
    std::cout << "report: " << file.string() << "\n";
    return report.passed() ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
