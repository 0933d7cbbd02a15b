#pragma once

// Monte Carlo experiment drivers: strong convergence rates, Wong-Zakai rates,
// mixed/rough equivalence and fBm covariance validation. Paths run in parallel;
// every reduction happens in stream order, so reports are reproducible from
// (spec, seed).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mixrough/calculus.hpp"
#include "mixrough/errors.hpp"
#include "mixrough/grid.hpp"
#include "mixrough/models.hpp"
#include "mixrough/parallel.hpp"
#include "mixrough/paths.hpp"
#include "mixrough/rate.hpp"
#include "mixrough/solvers.hpp"
#include "mixrough/zoo.hpp"

#ifndef MIXROUGH_VERSION
#define MIXROUGH_VERSION "0.0.0"
#endif

namespace mixrough {

inline constexpr const char* kVersion = MIXROUGH_VERSION;

struct ExperimentSpec {
  std::string kind = "rate";
  std::string model = "trig";
  double hurst = 0.75;
  double horizon = 1.0;
  /// Step sizes for rate/equivalence, smoothing indices n for wongzakai.
  std::vector<double> steps;
  std::size_t paths = 100;
  double gamma = 0.55;
  double gamma_prime = 0.75;
  std::uint64_t seed = 20240611;
  std::string out_dir = ".";

  /// Grid size for wongzakai, covcheck and simulate.
  std::size_t grid_steps = 4096;
  std::size_t refine = kDefaultReferenceRefine;
  std::size_t fine_factor = 8;
  /// rate: natural | skewed; simulate: natural | skewed | smoothed | milstein
  std::string scheme = "natural";
  std::size_t smoothing = 64;

  double slope_tolerance = 0.12;
  double wongzakai_slack = 0.08;
  double z_threshold = 4.0;
  double equivalence_factor = 3.0;
  bool negative_control = false;
};

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RateReport {
  std::string kind;
  ExperimentSpec spec;
  std::string model_hypothesis;
  bool model_fbm_diffusion_bounded_below = false;
  std::vector<Series> series;
  std::vector<Check> checks;
  std::vector<std::string> notes;
  /// Extra scalar results (expected slope, median per-path slope, ...).
  std::vector<std::pair<std::string, double>> scalars;
  double wall_seconds = 0.0;

  bool passed() const {
    return std::ranges::all_of(checks, [](const Check& c) { return c.passed; });
  }
  const Series& find(const std::string& name) const {
    for (const auto& s : series) {
      if (s.name == name) return s;
    }
    throw ContractError("RateReport: no series named " + name);
  }
  double scalar(const std::string& name) const {
    for (const auto& [k, v] : scalars) {
      if (k == name) return v;
    }
    throw ContractError("RateReport: no scalar named " + name);
  }
};

struct CovEntry {
  double s = 0.0;
  double t = 0.0;
  double empirical = 0.0;
  double exact = 0.0;
  double std_error = 0.0;
  double z = 0.0;
};

struct CovcheckReport {
  ExperimentSpec spec;
  std::vector<CovEntry> entries;
  std::vector<Check> checks;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;

  double max_abs_z() const {
    double z = 0.0;
    for (const auto& e : entries) z = std::max(z, std::abs(e.z));
    return z;
  }
  bool passed() const {
    return std::ranges::all_of(checks, [](const Check& c) { return c.passed; });
  }
};

namespace detail {

inline std::size_t steps_for(double horizon, double dt) {
  require(dt > 0.0, "experiment: step sizes must be positive");
  const double n = horizon / dt;
  const double r = std::round(n);
  require(r >= 2.0 && std::abs(n - r) <= 1e-9 * n, "experiment: T / step must be an integer >= 2");
  return static_cast<std::size_t>(r);
}

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Step sizes sorted coarse to fine, with grid sizes and a common fine driver grid.
struct StepLadder {
  std::vector<double> steps;
  std::vector<std::size_t> counts;
  std::size_t driver_steps = 0;

  StepLadder(const ExperimentSpec& spec) {
    require(spec.steps.size() >= 2, "experiment: need at least two step sizes");
    require(spec.refine >= 4, "experiment: refine must be at least 4");
    require(spec.fine_factor >= 1, "experiment: fine_factor must be positive");
    steps = spec.steps;
    std::ranges::sort(steps, std::greater<>());
    for (double dt : steps) counts.push_back(steps_for(spec.horizon, dt));
    driver_steps = counts.back() * spec.refine * spec.fine_factor;
    for (std::size_t n : counts) {
      require(driver_steps % (n * spec.refine * spec.fine_factor) == 0,
              "experiment: step sizes are not nested (use dyadic steps)");
    }
  }
};

inline void validate_common(const ExperimentSpec& spec) {
  require(spec.paths >= 1, "experiment: paths must be >= 1");
  require(spec.horizon > 0.0, "experiment: T must be positive");
  FbmParams{spec.hurst, 1}.validate();
}

inline SamplePath driver_on(const SamplePath& path, const TimeGrid& grid) {
  return path.grid() == grid ? path : restrict_to(path, grid);
}

inline void fill_model_tags(RateReport& report, const SdeModel& model) {
  report.model_hypothesis = to_string(model.hypothesis);
  report.model_fbm_diffusion_bounded_below = model.fbm_diffusion_bounded_below;
}

}  // namespace detail

/// Strong-error convergence study of natural Euler (rough model) or skewed Euler
/// (its mixed image) against a refined Milstein reference on the rough model.
inline RateReport run_rate(const ExperimentSpec& spec) {
  detail::Stopwatch clock;
  detail::validate_common(spec);
  detail::require(spec.scheme == "natural" || spec.scheme == "skewed", "rate: scheme must be natural or skewed");
  const SdeModel rough = zoo::make(spec.model, ModelKind::Rough);
  const bool deterministic = zoo::is_deterministic(rough);
  if (!deterministic) {
    detail::require(rough.hypothesis == Hypothesis::Cb2Delta && rough.fbm_diffusion_bounded_below,
                    "rate: model '" + spec.model + "' is not tagged C_b^{2,delta} with inf c > 0");
  }
  const SdeModel mixed = to_mixed(rough);
  const detail::StepLadder ladder(spec);
  const TimeGrid driver_grid(spec.horizon, ladder.driver_steps);
  const FbmSampler sampler(driver_grid, spec.hurst);
  const std::size_t levels = ladder.steps.size();

  std::vector<std::vector<double>> errors(levels, std::vector<double>(spec.paths));
  parallel_for(spec.paths, [&](std::size_t p) {
    const RngSeed seed{spec.seed, p};
    const SamplePath w = sample_brownian(driver_grid, rough.m(), seed);
    const SamplePath b = sampler.sample(rough.l(), seed);
    for (std::size_t i = 0; i < levels; ++i) {
      const TimeGrid coarse(spec.horizon, ladder.counts[i]);
      const TimeGrid fine = coarse.refined(spec.refine * spec.fine_factor);
      const SamplePath wf = detail::driver_on(w, fine);
      const SamplePath bf = detail::driver_on(b, fine);
      const SolveOutput approx = spec.scheme == "natural" ? solve_natural_euler(rough, wf, bf, coarse)
                                                          : solve_skewed_euler(mixed, wf, bf, coarse);
      const SolveOutput ref = reference_solution(rough, wf, bf, coarse, spec.refine);
      errors[i][p] = strong_error(approx, ref);
    }
  });

  RateReport report;
  report.kind = "rate";
  report.spec = spec;
  detail::fill_model_tags(report, rough);
  report.series.push_back(make_series(spec.scheme + "-euler", ladder.steps, errors));
  const double expected = deterministic ? 1.0 : std::min(0.5, 2.0 * spec.hurst - 1.0);
  const RateFit& fit = report.series.front().fit;
  report.scalars = {{"expected_slope", expected}, {"fitted_slope", fit.slope}, {"slope_stderr", fit.std_error}};
  report.checks.push_back({"slope", std::abs(fit.slope - expected) <= spec.slope_tolerance,
                           "fitted " + detail::fmt(fit.slope) + " vs expected " + detail::fmt(expected) + " +/- " +
                               detail::fmt(spec.slope_tolerance)});
  if (deterministic) report.notes.push_back("deterministic model: harness self-test, expected Euler order 1");
  report.notes.push_back("reference: Milstein rough step at refine " + std::to_string(spec.refine) +
                         ", Levy areas from a " + std::to_string(spec.fine_factor) + "-fold finer driver");
  report.wall_seconds = clock.seconds();
  return report;
}

/// Smoothed-fBm approximation rates: path Hölder norm of B^{H,n} - B^H and the
/// area distance between the tables of (t, W, B^{H,n}) and (t, W, B^H).
inline RateReport run_wongzakai(const ExperimentSpec& spec) {
  detail::Stopwatch clock;
  detail::validate_common(spec);
  detail::require(0.0 < spec.gamma && spec.gamma < spec.gamma_prime && spec.gamma_prime < spec.hurst,
                  "wongzakai: need 0 < gamma < gamma' < H");
  detail::require(spec.steps.size() >= 3, "wongzakai: need at least three smoothing indices");
  std::vector<std::size_t> ns;
  for (double v : spec.steps) {
    detail::require(v >= 1.0 && v == std::round(v), "wongzakai: smoothing indices must be positive integers");
    ns.push_back(static_cast<std::size_t>(v));
  }
  std::ranges::sort(ns);
  const TimeGrid grid(spec.horizon, spec.grid_steps);
  for (std::size_t n : ns) (void)detail::window_cells(grid, n);
  detail::require(grid.steps() % spec.fine_factor == 0, "wongzakai: fine_factor must divide the grid size");
  const FbmSampler sampler(grid, spec.hurst);
  const DriverLayout layout{1, 1};
  const std::size_t levels = ns.size();

  std::vector<std::vector<double>> path_norm(levels, std::vector<double>(spec.paths));
  std::vector<std::vector<double>> area(levels, std::vector<double>(spec.paths));
  parallel_for(spec.paths, [&](std::size_t p) {
    const RngSeed seed{spec.seed, p};
    const SamplePath w = sample_brownian(grid, 1, seed);
    const SamplePath b = sampler.sample(1, seed);
    const LevyAreaTable exact = build_levy_area(joint_driver(w, b), layout, spec.fine_factor);
    for (std::size_t i = 0; i < levels; ++i) {
      const SamplePath smooth = smooth_fbm(b, ns[i]);
      path_norm[i][p] = holder_seminorm(difference(b, smooth), 0, spec.gamma);
      const LevyAreaTable approx = build_levy_area(joint_driver(w, smooth), layout, spec.fine_factor);
      area[i][p] = area_distance(approx, exact, spec.gamma);
    }
  });

  std::vector<double> levels_n(ns.begin(), ns.end());
  std::vector<double> slopes(spec.paths);
  for (std::size_t p = 0; p < spec.paths; ++p) {
    std::vector<double> e(levels);
    for (std::size_t i = 0; i < levels; ++i) e[i] = path_norm[i][p];
    slopes[p] = fit_rate(levels_n, e).slope;
  }
  const double median_slope = median_of(slopes);
  const double bound = -(spec.gamma_prime - spec.gamma) + spec.wongzakai_slack;

  RateReport report;
  report.kind = "wongzakai";
  report.spec = spec;
  report.model_hypothesis = "fBm only";
  report.series.push_back(make_series("path-norm", levels_n, path_norm));
  report.series.push_back(make_series("area", levels_n, area));
  const auto medians = report.series[1].medians();
  bool decreasing = true;
  for (std::size_t i = 1; i < medians.size(); ++i) decreasing = decreasing && medians[i] < medians[i - 1];
  report.scalars = {{"median_path_slope", median_slope},
                    {"path_slope_bound", bound},
                    {"area_slope", report.series[1].fit.slope}};
  report.checks.push_back({"path-norm-decay", median_slope <= bound,
                           "median per-path slope " + detail::fmt(median_slope) + " <= " + detail::fmt(bound)});
  report.checks.push_back({"area-monotone", decreasing, "median area distance strictly decreasing in n"});
  report.notes.push_back("the rate lemmas are upper bounds with random constants; decay at least as fast as "
                         "-(gamma' - gamma) within the slack is the pass criterion");
  report.wall_seconds = clock.seconds();
  return report;
}

/// Natural Euler on a rough model vs skewed Euler on its mixed image, same noise.
inline RateReport run_equivalence(const ExperimentSpec& spec) {
  detail::Stopwatch clock;
  detail::validate_common(spec);
  const SdeModel rough = zoo::make(spec.model, ModelKind::Rough);
  detail::require(rough.hypothesis == Hypothesis::Cb2Delta,
                  "equivalence: model '" + spec.model + "' is not tagged C_b^{2,delta}");
  const SdeModel mixed = to_mixed(rough);
  const detail::StepLadder ladder(spec);
  const TimeGrid driver_grid(spec.horizon, ladder.driver_steps);
  const FbmSampler sampler(driver_grid, spec.hurst);
  const std::size_t levels = ladder.steps.size();

  using Table = std::vector<std::vector<double>>;
  Table distance(levels, std::vector<double>(spec.paths));
  Table natural_err = distance, skewed_err = distance;
  parallel_for(spec.paths, [&](std::size_t p) {
    const RngSeed seed{spec.seed, p};
    const SamplePath w = sample_brownian(driver_grid, rough.m(), seed);
    const SamplePath b = sampler.sample(rough.l(), seed);
    for (std::size_t i = 0; i < levels; ++i) {
      const TimeGrid coarse(spec.horizon, ladder.counts[i]);
      const TimeGrid fine = coarse.refined(spec.refine * spec.fine_factor);
      const SamplePath wf = detail::driver_on(w, fine);
      const SamplePath bf = detail::driver_on(b, fine);
      const SolveOutput nat = solve_natural_euler(rough, wf, bf, coarse);
      const SolveOutput skew = solve_skewed_euler(mixed, wf, bf, coarse);
      const SolveOutput ref = reference_solution(rough, wf, bf, coarse, spec.refine);
      distance[i][p] = strong_error(nat, skew);
      natural_err[i][p] = strong_error(nat, ref);
      skewed_err[i][p] = strong_error(skew, ref);
    }
  });

  RateReport report;
  report.kind = "equivalence";
  report.spec = spec;
  detail::fill_model_tags(report, rough);
  report.series.push_back(make_series("distance", ladder.steps, distance));
  report.series.push_back(make_series("natural-vs-reference", ladder.steps, natural_err));
  report.series.push_back(make_series("skewed-vs-reference", ladder.steps, skewed_err));

  // records are sorted by level: front = finest step, back = coarsest
  const auto& dist = report.series[0].records;
  report.checks.push_back({"distance-decreases", dist.front().rms < dist.back().rms,
                           "RMS distance " + detail::fmt(dist.front().rms) + " at the finest step vs " +
                               detail::fmt(dist.back().rms) + " at the coarsest"});
  bool bounded = true;
  for (std::size_t i = 0; i < levels; ++i) {
    const double nat = report.series[1].records[i].rms;
    const double skew = report.series[2].records[i].rms;
    bounded = bounded && skew <= spec.equivalence_factor * nat && nat <= spec.equivalence_factor * skew;
  }
  report.checks.push_back({"common-reference", bounded,
                           "each scheme's error to the reference within " + detail::fmt(spec.equivalence_factor) +
                               "x of the other's at every step"});
  report.notes.push_back("the mixed-to-rough drift is only C^1_b in general; uniqueness of the transformed rough "
                         "equation is not established, so the comparison is numerical only");
  report.wall_seconds = clock.seconds();
  return report;
}

/// Empirical Cov(B_s, B_t) at (T/4, T/2), (T/2, T), (T/4, T) against R_H with z-scores.
/// With negative_control the increments of every path are shuffled first, which
/// destroys the covariance structure; the check then asserts detection.
inline CovcheckReport run_covcheck(const ExperimentSpec& spec) {
  detail::Stopwatch clock;
  detail::validate_common(spec);
  detail::require(spec.grid_steps % 4 == 0, "covcheck: grid size must be divisible by 4");
  const TimeGrid grid(spec.horizon, spec.grid_steps);
  const FbmSampler sampler(grid, spec.hurst);
  const std::size_t q = spec.grid_steps / 4;
  const std::size_t pairs[3][2] = {{q, 2 * q}, {2 * q, 4 * q}, {q, 4 * q}};

  std::vector<double> products(spec.paths * 3);
  parallel_for(spec.paths, [&](std::size_t p) {
    const RngSeed seed{spec.seed, p};
    SamplePath b = sampler.sample(1, seed);
    if (spec.negative_control) {
      auto v = b.values(0);
      std::vector<double> inc(grid.steps());
      for (std::size_t k = 0; k < inc.size(); ++k) inc[k] = v[k + 1] - v[k];
      auto engine = make_engine(seed, DriverTag::Shuffle);
      std::shuffle(inc.begin(), inc.end(), engine);
      for (std::size_t k = 0; k < inc.size(); ++k) v[k + 1] = v[k] + inc[k];
    }
    for (std::size_t e = 0; e < 3; ++e) products[p * 3 + e] = b(pairs[e][0], 0) * b(pairs[e][1], 0);
  });

  CovcheckReport report;
  report.spec = spec;
  report.warnings = sampler.warnings();
  const double n = static_cast<double>(spec.paths);
  for (std::size_t e = 0; e < 3; ++e) {
    CovEntry entry;
    entry.s = grid.time(pairs[e][0]);
    entry.t = grid.time(pairs[e][1]);
    entry.exact = fbm_covariance(spec.hurst, entry.s, entry.t);
    double sum = 0.0;
    for (std::size_t p = 0; p < spec.paths; ++p) sum += products[p * 3 + e];
    entry.empirical = sum / n;
    double var = 0.0;
    for (std::size_t p = 0; p < spec.paths; ++p) {
      const double dv = products[p * 3 + e] - entry.empirical;
      var += dv * dv;
    }
    entry.std_error = spec.paths > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
    entry.z = entry.std_error > 0.0 ? (entry.empirical - entry.exact) / entry.std_error : 0.0;
    report.entries.push_back(entry);
  }
  const double worst = report.max_abs_z();
  if (spec.negative_control) {
    report.checks.push_back({"control-detected", worst > spec.z_threshold,
                             "max |z| " + detail::fmt(worst) + " > " + detail::fmt(spec.z_threshold)});
  } else {
    report.checks.push_back({"covariance", worst <= spec.z_threshold,
                             "max |z| " + detail::fmt(worst) + " <= " + detail::fmt(spec.z_threshold)});
  }
  report.wall_seconds = clock.seconds();
  return report;
}

/// One trajectory together with the drivers that produced it.
struct Trajectory {
  SamplePath brownian;
  SamplePath fractional;
  SolveOutput output;
  Scheme scheme;
};

inline Trajectory run_simulate(const ExperimentSpec& spec) {
  detail::validate_common(spec);
  detail::require(spec.fine_factor >= 1, "simulate: fine_factor must be positive");
  const TimeGrid grid(spec.horizon, spec.grid_steps);
  const TimeGrid fine = grid.refined(spec.fine_factor);
  const RngSeed seed{spec.seed, 0};
  const SdeModel rough = zoo::make(spec.model, ModelKind::Rough);
  const SamplePath w = sample_brownian(fine, rough.m(), seed);
  const SamplePath b = FbmSampler(fine, spec.hurst).sample(rough.l(), seed);
  if (spec.scheme == "natural") return {w, b, solve_natural_euler(rough, w, b, grid), Scheme::NaturalEuler};
  if (spec.scheme == "milstein") {
    const auto table = build_levy_area(joint_driver(w, b), {rough.m(), rough.l()}, spec.fine_factor);
    return {w, b, solve_milstein_rough(rough, table, grid), Scheme::MilsteinRough};
  }
  const SdeModel mixed = to_mixed(rough);
  if (spec.scheme == "skewed") return {w, b, solve_skewed_euler(mixed, w, b, grid), Scheme::SkewedEuler};
  if (spec.scheme == "smoothed") {
    return {w, b, solve_smoothed_euler(mixed, w, b, spec.smoothing, grid), Scheme::SmoothedEuler};
  }
  throw ContractError("simulate: unknown scheme '" + spec.scheme + "'");
}

}  // namespace mixrough
