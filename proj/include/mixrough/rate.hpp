#pragma once

// Error aggregation and log-log slope fitting for convergence studies.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "mixrough/errors.hpp"

namespace mixrough {

struct RateFit {
  double slope = 0.0;
  double std_error = 0.0;
};

/// Least-squares line through (log level, log error).
inline RateFit fit_rate(std::span<const double> levels, std::span<const double> errors) {
  detail::require(levels.size() == errors.size(), "fit_rate: levels and errors differ in length");
  detail::require(levels.size() >= 3, "fit_rate: need at least three levels");
  const std::size_t n = levels.size();
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    detail::require(levels[i] > 0.0 && errors[i] > 0.0, "fit_rate: levels and errors must be positive");
    x[i] = std::log(levels[i]);
    y[i] = std::log(errors[i]);
  }
  const double xm = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double ym = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
  }
  detail::require(sxx > 0.0, "fit_rate: levels must not all coincide");
  RateFit fit;
  fit.slope = sxy / sxx;
  const double intercept = ym - fit.slope * xm;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (intercept + fit.slope * x[i]);
    sse += r * r;
  }
  fit.std_error = n > 2 ? std::sqrt(sse / static_cast<double>(n - 2) / sxx) : 0.0;
  return fit;
}

/// Summary of per-path errors at one level (a step size or a smoothing index).
struct LevelRecord {
  double level = 0.0;
  double mean = 0.0;
  double rms = 0.0;
  double std_error = 0.0;  // of the mean
  double max = 0.0;
  double median = 0.0;
  std::size_t count = 0;
};

inline double median_of(std::vector<double> v) {
  detail::require(!v.empty(), "median_of: empty sample");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

inline LevelRecord summarize(double level, std::span<const double> errors) {
  detail::require(!errors.empty(), "summarize: no samples");
  LevelRecord r;
  r.level = level;
  r.count = errors.size();
  const double n = static_cast<double>(errors.size());
  double sum = 0.0, sq = 0.0;
  for (double e : errors) {
    sum += e;
    sq += e * e;
    r.max = std::max(r.max, e);
  }
  r.mean = sum / n;
  r.rms = std::sqrt(sq / n);
  if (errors.size() > 1) {
    double var = 0.0;
    for (double e : errors) var += (e - r.mean) * (e - r.mean);
    r.std_error = std::sqrt(var / (n - 1.0) / n);
  }
  r.median = median_of(std::vector<double>(errors.begin(), errors.end()));
  return r;
}

/// A named sequence of level records with its fitted rate (fit on RMS).
struct Series {
  std::string name;
  std::vector<LevelRecord> records;
  RateFit fit;

  std::vector<double> levels() const {
    std::vector<double> v;
    for (const auto& r : records) v.push_back(r.level);
    return v;
  }
  std::vector<double> rms() const {
    std::vector<double> v;
    for (const auto& r : records) v.push_back(r.rms);
    return v;
  }
  std::vector<double> medians() const {
    std::vector<double> v;
    for (const auto& r : records) v.push_back(r.median);
    return v;
  }
};

/// Records sorted by level; errors[i] holds the per-path samples at levels[i].
inline Series make_series(std::string name, std::span<const double> levels,
                          const std::vector<std::vector<double>>& errors) {
  detail::require(levels.size() == errors.size(), "make_series: shape mismatch");
  Series s{std::move(name), {}, {}};
  for (std::size_t i = 0; i < levels.size(); ++i) s.records.push_back(summarize(levels[i], errors[i]));
  std::ranges::sort(s.records, {}, &LevelRecord::level);
  if (s.records.size() >= 3) {
    const auto lv = s.levels();
    const auto rm = s.rms();
    if (std::ranges::all_of(rm, [](double e) { return e > 0.0; })) s.fit = fit_rate(lv, rm);
  }
  return s;
}

}  // namespace mixrough
