#pragma once

// Uniform time grids, multi-component sample paths and seeded random streams.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mixrough/errors.hpp"

namespace mixrough {

/// Uniform grid t_k = k * T / N on [0, T].
class TimeGrid {
 public:
  TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ContractError("TimeGrid: horizon must be positive");
    if (steps < 2) throw ContractError("TimeGrid: need at least 2 steps");
  }

  double horizon() const noexcept { return horizon_; }
  std::size_t steps() const noexcept { return steps_; }
  std::size_t nodes() const noexcept { return steps_ + 1; }
  double spacing() const noexcept { return horizon_ / static_cast<double>(steps_); }
  double time(std::size_t k) const noexcept {
    return horizon_ * static_cast<double>(k) / static_cast<double>(steps_);
  }

  /// Integer factor r such that `fine` has r cells per cell of *this; throws otherwise.
  std::size_t refinement_factor(const TimeGrid& fine) const {
    detail::require(fine.horizon_ == horizon_, "grid refinement: horizons differ");
    detail::require(fine.steps_ % steps_ == 0, "grid refinement: step counts are not nested");
    return fine.steps_ / steps_;
  }

  TimeGrid refined(std::size_t factor) const {
    detail::require(factor >= 1, "grid refinement: factor must be >= 1");
    return TimeGrid(horizon_, steps_ * factor);
  }

  TimeGrid coarsened(std::size_t factor) const {
    detail::require(factor >= 1 && steps_ % factor == 0, "grid coarsening: factor must divide the step count");
    return TimeGrid(horizon_, steps_ / factor);
  }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  double horizon_;
  std::size_t steps_;
};

/// Read-only view of one component of a path together with its grid.
struct PathComponent {
  const TimeGrid* grid;
  std::span<const double> values;

  double operator[](std::size_t k) const { return values[k]; }
};

/// Values of a c-component path at every node of a grid. Storage is component-major.
class SamplePath {
 public:
  SamplePath(TimeGrid grid, std::size_t components)
      : grid_(grid), components_(components), values_(components * grid.nodes(), 0.0) {}

  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t components() const noexcept { return components_; }

  double operator()(std::size_t node, std::size_t component) const {
    return values_[component * grid_.nodes() + node];
  }
  double& operator()(std::size_t node, std::size_t component) {
    return values_[component * grid_.nodes() + node];
  }

  std::span<const double> values(std::size_t component) const {
    detail::require(component < components_, "SamplePath: component out of range");
    return {values_.data() + component * grid_.nodes(), grid_.nodes()};
  }
  std::span<double> values(std::size_t component) {
    detail::require(component < components_, "SamplePath: component out of range");
    return {values_.data() + component * grid_.nodes(), grid_.nodes()};
  }

  PathComponent component(std::size_t c) const { return {&grid_, values(c)}; }

  bool all_finite() const {
    for (double v : values_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

 private:
  TimeGrid grid_;
  std::size_t components_;
  std::vector<double> values_;
};

/// Node-extraction of `path` onto a coarser grid nested in its own.
inline SamplePath restrict_to(const SamplePath& path, const TimeGrid& coarse) {
  const std::size_t stride = coarse.refinement_factor(path.grid());
  SamplePath out(coarse, path.components());
  for (std::size_t c = 0; c < path.components(); ++c) {
    for (std::size_t k = 0; k < coarse.nodes(); ++k) out(k, c) = path(k * stride, c);
  }
  return out;
}

/// Componentwise difference a - b on a shared grid.
inline SamplePath difference(const SamplePath& a, const SamplePath& b) {
  detail::require(a.grid() == b.grid() && a.components() == b.components(), "difference: shape mismatch");
  SamplePath out(a.grid(), a.components());
  for (std::size_t c = 0; c < a.components(); ++c) {
    auto x = a.values(c), y = b.values(c);
    auto z = out.values(c);
    for (std::size_t k = 0; k < z.size(); ++k) z[k] = x[k] - y[k];
  }
  return out;
}

/// Tags separating the random streams of different drivers sharing a (seed, stream) pair.
enum class DriverTag : std::uint64_t { Brownian = 1, Fractional = 2, Shuffle = 3, Fixture = 4 };

/// Master seed plus Monte Carlo stream index.
struct RngSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Engine for one (seed, stream, driver) triple. Distinct triples give unrelated engines.
inline std::mt19937_64 make_engine(RngSeed seed, DriverTag tag) {
  const std::uint64_t mixed = detail::splitmix64(
      seed.seed ^ detail::splitmix64(seed.stream ^ detail::splitmix64(static_cast<std::uint64_t>(tag))));
  std::seed_seq seq{static_cast<std::uint32_t>(mixed), static_cast<std::uint32_t>(mixed >> 32),
                    static_cast<std::uint32_t>(seed.stream), static_cast<std::uint32_t>(tag)};
  return std::mt19937_64(seq);
}

}  // namespace mixrough
