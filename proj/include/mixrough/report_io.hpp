#pragma once

// JSON and CSV emitters for experiment reports.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "mixrough/errors.hpp"
#include "mixrough/experiments.hpp"

namespace mixrough {

inline nlohmann::json to_json(const ExperimentSpec& s) {
  return {{"kind", s.kind},
          {"model", s.model},
          {"H", s.hurst},
          {"T", s.horizon},
          {"steps", s.steps},
          {"M", s.paths},
          {"gamma", s.gamma},
          {"gamma_prime", s.gamma_prime},
          {"seed", s.seed},
          {"out_dir", s.out_dir},
          {"N", s.grid_steps},
          {"refine", s.refine},
          {"fine_factor", s.fine_factor},
          {"scheme", s.scheme},
          {"smoothing", s.smoothing},
          {"slope_tol", s.slope_tolerance},
          {"wz_slack", s.wongzakai_slack},
          {"z_threshold", s.z_threshold},
          {"equivalence_factor", s.equivalence_factor},
          {"negative_control", s.negative_control}};
}

inline nlohmann::json to_json(const LevelRecord& r) {
  return {{"level", r.level}, {"mean", r.mean},     {"rms", r.rms},     {"stderr", r.std_error},
          {"max", r.max},     {"median", r.median}, {"count", r.count}};
}

inline nlohmann::json to_json(const Check& c) {
  return {{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}};
}

inline nlohmann::json to_json(const RateReport& r) {
  nlohmann::json series = nlohmann::json::array();
  for (const auto& s : r.series) {
    nlohmann::json records = nlohmann::json::array();
    for (const auto& rec : s.records) records.push_back(to_json(rec));
    series.push_back(
        {{"name", s.name}, {"records", records}, {"fit", {{"slope", s.fit.slope}, {"stderr", s.fit.std_error}}}});
  }
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  nlohmann::json scalars = nlohmann::json::object();
  for (const auto& [k, v] : r.scalars) scalars[k] = v;
  return {{"experiment", r.kind},
          {"version", kVersion},
          {"spec", to_json(r.spec)},
          {"model", {{"name", r.spec.model},
                     {"hypothesis", r.model_hypothesis},
                     {"fbm_diffusion_bounded_below", r.model_fbm_diffusion_bounded_below}}},
          {"series", series},
          {"scalars", scalars},
          {"checks", checks},
          {"passed", r.passed()},
          {"notes", r.notes},
          {"wall_seconds", r.wall_seconds}};
}

inline nlohmann::json to_json(const CovcheckReport& r) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"s", e.s},
                       {"t", e.t},
                       {"empirical", e.empirical},
                       {"exact", e.exact},
                       {"stderr", e.std_error},
                       {"z", e.z}});
  }
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  return {{"experiment", "covcheck"},
          {"version", kVersion},
          {"spec", to_json(r.spec)},
          {"entries", entries},
          {"checks", checks},
          {"passed", r.passed()},
          {"warnings", r.warnings},
          {"wall_seconds", r.wall_seconds}};
}

/// "<kind>_seed<seed>" (plus "_control" for a negative-control covcheck).
inline std::string report_stem(const ExperimentSpec& spec) {
  std::string stem = spec.kind + "_seed" + std::to_string(spec.seed);
  if (spec.kind == "covcheck" && spec.negative_control) stem += "_control";
  return stem;
}

inline std::string rate_csv(const RateReport& r) {
  std::string out = "series,level,mean,rms,stderr,max\n";
  char line[256];
  for (const auto& s : r.series) {
    for (const auto& rec : s.records) {
      std::snprintf(line, sizeof line, "%s,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.name.c_str(), rec.level, rec.mean,
                    rec.rms, rec.std_error, rec.max);
      out += line;
    }
  }
  return out;
}

inline std::string covcheck_csv(const CovcheckReport& r) {
  std::string out = "s,t,empirical,exact,stderr,z\n";
  char line[256];
  for (const auto& e : r.entries) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", e.s, e.t, e.empirical, e.exact,
                  e.std_error, e.z);
    out += line;
  }
  return out;
}

namespace detail {

inline void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file);
  if (!out) throw ContractError("cannot open " + file.string() + " for writing");
  out << text;
}

}  // namespace detail

/// Writes <stem>.json and <stem>.csv into spec.out_dir; returns the JSON path.
template <class Report>
std::filesystem::path write_report(const Report& report, const std::string& csv) {
  const std::filesystem::path dir(report.spec.out_dir);
  std::filesystem::create_directories(dir);
  const std::string stem = report_stem(report.spec);
  detail::write_text(dir / (stem + ".json"), to_json(report).dump(2) + "\n");
  detail::write_text(dir / (stem + ".csv"), csv);
  return dir / (stem + ".json");
}

inline std::filesystem::path write_report(const RateReport& r) { return write_report(r, rate_csv(r)); }
inline std::filesystem::path write_report(const CovcheckReport& r) { return write_report(r, covcheck_csv(r)); }

}  // namespace mixrough
