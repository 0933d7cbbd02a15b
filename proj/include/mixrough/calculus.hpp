#pragma once

// Discrete pathwise integration on uniform grids: Itô (left point) and
// Stratonovich/Young (trapezoid) sums, level-2 area tables for the joint driver
// g = (t, W, B^H), Chen extension, and compensated rough Riemann sums.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "mixrough/errors.hpp"
#include "mixrough/grid.hpp"

namespace mixrough {

enum class IntegralRule { LeftPoint, Trapezoid };

/// Riemann sum of f against g over nodes [s, t].
inline double discrete_integral(PathComponent f, PathComponent g, IntegralRule rule, std::size_t s,
                                std::size_t t) {
  detail::require(*f.grid == *g.grid, "discrete_integral: integrand and driver live on different grids");
  detail::require(s <= t && t <= f.grid->steps(), "discrete_integral: need s <= t <= N");
  double sum = 0.0;
  if (rule == IntegralRule::LeftPoint) {
    for (std::size_t k = s; k < t; ++k) sum += f[k] * (g[k + 1] - g[k]);
  } else {
    for (std::size_t k = s; k < t; ++k) sum += 0.5 * (f[k] + f[k + 1]) * (g[k + 1] - g[k]);
  }
  return sum;
}

/// Sum of squared increments over nodes [s, t].
inline double quadratic_variation(PathComponent f, std::size_t s, std::size_t t) {
  detail::require(s <= t && t <= f.grid->steps(), "quadratic_variation: need s <= t <= N");
  double sum = 0.0;
  for (std::size_t k = s; k < t; ++k) {
    const double d = f[k + 1] - f[k];
    sum += d * d;
  }
  return sum;
}

/// Component layout of the joint driver (t, W^1..W^m, B^1..B^l).
struct DriverLayout {
  std::size_t brownian = 0;
  std::size_t fractional = 0;

  std::size_t dimension() const noexcept { return 1 + brownian + fractional; }
  bool is_brownian(std::size_t i) const noexcept { return i >= 1 && i <= brownian; }

  friend bool operator==(const DriverLayout&, const DriverLayout&) = default;
};

/// Stacks (t, W, B) into one path. W and B must share a grid.
inline SamplePath joint_driver(const SamplePath& brownian, const SamplePath& fractional) {
  detail::require(brownian.grid() == fractional.grid(), "joint_driver: W and B live on different grids");
  const TimeGrid& grid = brownian.grid();
  SamplePath g(grid, 1 + brownian.components() + fractional.components());
  for (std::size_t k = 0; k < grid.nodes(); ++k) g(k, 0) = grid.time(k);
  for (std::size_t c = 0; c < brownian.components(); ++c) {
    std::ranges::copy(brownian.values(c), g.values(1 + c).begin());
  }
  for (std::size_t c = 0; c < fractional.components(); ++c) {
    std::ranges::copy(fractional.values(c), g.values(1 + brownian.components() + c).begin());
  }
  return g;
}

/// Per-cell second-order increments G_{t_k,t_{k+1}}(i, j) = int (x^i_u - x^i_{t_k}) dx^j_u,
/// together with the driver values at the nodes. Areas over longer intervals are
/// assembled on demand with Chen's relation.
class LevyAreaTable {
 public:
  /// nodes: (N+1) x D row-major driver values; cells: N x D x D.
  LevyAreaTable(TimeGrid grid, DriverLayout layout, std::vector<double> nodes, std::vector<double> cells)
      : grid_(grid), layout_(layout), nodes_(std::move(nodes)), cells_(std::move(cells)) {
    const std::size_t d = layout_.dimension();
    detail::require(nodes_.size() == grid_.nodes() * d, "LevyAreaTable: node block has the wrong size");
    detail::require(cells_.size() == grid_.steps() * d * d, "LevyAreaTable: cell block has the wrong size");
  }

  const TimeGrid& grid() const noexcept { return grid_; }
  const DriverLayout& layout() const noexcept { return layout_; }
  std::size_t dimension() const noexcept { return layout_.dimension(); }

  std::span<const double> node(std::size_t k) const {
    return {nodes_.data() + k * dimension(), dimension()};
  }
  std::span<const double> cell(std::size_t k) const {
    const std::size_t d = dimension();
    return {cells_.data() + k * d * d, d * d};
  }
  double cell(std::size_t k, std::size_t i, std::size_t j) const {
    const std::size_t d = dimension();
    return cells_[(k * d + i) * d + j];
  }
  double increment(std::size_t k, std::size_t i) const {
    const std::size_t d = dimension();
    return nodes_[(k + 1) * d + i] - nodes_[k * d + i];
  }

  const std::vector<double>& node_block() const noexcept { return nodes_; }
  const std::vector<double>& cell_block() const noexcept { return cells_; }

  /// G_{s,t}, row-major D x D, by folding cells left to right.
  std::vector<double> area(std::size_t s, std::size_t t) const {
    detail::require(s <= t && t <= grid_.steps(), "LevyAreaTable::area: need s <= t <= N");
    const std::size_t d = dimension();
    std::vector<double> g(d * d, 0.0);
    for (std::size_t k = s; k < t; ++k) accumulate(g, s, k);
    return g;
  }

  // g <- g + cell_k + (x_k - x_s) (x) (x_{k+1} - x_k): extends G_{s,k} to G_{s,k+1}.
  void accumulate(std::vector<double>& g, std::size_t s, std::size_t k) const {
    const std::size_t d = dimension();
    const double* xs = nodes_.data() + s * d;
    const double* xk = nodes_.data() + k * d;
    const double* xn = xk + d;
    const double* c = cells_.data() + k * d * d;
    for (std::size_t i = 0; i < d; ++i) {
      const double left = xk[i] - xs[i];
      for (std::size_t j = 0; j < d; ++j) g[i * d + j] += c[i * d + j] + left * (xn[j] - xk[j]);
    }
  }

 private:
  TimeGrid grid_;
  DriverLayout layout_;
  std::vector<double> nodes_;
  std::vector<double> cells_;
};

/// Area table on the grid N / fine_factor from a driver (t, W, B) sampled on the fine grid.
///
/// Fine cells use the trapezoid area x^i_inc * x^j_inc / 2 (Young for pairs involving
/// time or fBm, Stratonovich for Brownian pairs); coarse cells aggregate them with
/// Chen's relation. Diagonal entries are set to the closed form (increment)^2 / 2.
inline LevyAreaTable build_levy_area(const SamplePath& driver, DriverLayout layout, std::size_t fine_factor = 8) {
  const std::size_t d = layout.dimension();
  detail::require(driver.components() == d, "build_levy_area: driver must have components (t, W, B)");
  detail::require(fine_factor >= 1 && driver.grid().steps() % fine_factor == 0,
                  "build_levy_area: fine grid is not a refinement of the target grid");
  const TimeGrid& fine = driver.grid();
  const double tol = 1e-12 * fine.horizon();
  for (std::size_t k = 0; k < fine.nodes(); ++k) {
    detail::require(std::abs(driver(k, 0) - fine.time(k)) <= tol,
                    "build_levy_area: component 0 must be the time coordinate");
  }
  const TimeGrid coarse = fine.coarsened(fine_factor);
  const std::size_t steps = coarse.steps();

  std::vector<double> nodes(coarse.nodes() * d);
  for (std::size_t k = 0; k < coarse.nodes(); ++k) {
    for (std::size_t i = 0; i < d; ++i) nodes[k * d + i] = driver(k * fine_factor, i);
  }

  std::vector<double> cells(steps * d * d, 0.0);
  std::vector<double> start(d), left(d), inc(d);
  for (std::size_t k = 0; k < steps; ++k) {
    double* g = cells.data() + k * d * d;
    const std::size_t base = k * fine_factor;
    for (std::size_t i = 0; i < d; ++i) start[i] = driver(base, i);
    for (std::size_t f = base; f < base + fine_factor; ++f) {
      for (std::size_t i = 0; i < d; ++i) {
        left[i] = driver(f, i) - start[i];
        inc[i] = driver(f + 1, i) - driver(f, i);
      }
      for (std::size_t i = 0; i < d; ++i) {
        const double li = left[i] + 0.5 * inc[i];
        for (std::size_t j = 0; j < d; ++j) g[i * d + j] += li * inc[j];
      }
    }
    for (std::size_t i = 0; i < d; ++i) {
      const double delta = nodes[(k + 1) * d + i] - nodes[k * d + i];
      g[i * d + i] = 0.5 * delta * delta;
    }
  }
  return LevyAreaTable(coarse, layout, std::move(nodes), std::move(cells));
}

/// G_{s,t} = G_{s,u} + G_{u,t} + (x_u - x_s) (x) (x_t - x_u).
inline Eigen::MatrixXd chen_extend(const LevyAreaTable& table, std::size_t s, std::size_t u, std::size_t t) {
  detail::require(s <= u && u <= t && t <= table.grid().steps(), "chen_extend: need s <= u <= t <= N");
  const std::size_t d = table.dimension();
  const auto left = table.area(s, u);
  const auto right = table.area(u, t);
  const auto xs = table.node(s), xu = table.node(u), xt = table.node(t);
  Eigen::MatrixXd g(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          left[i * d + j] + right[i * d + j] + (xu[i] - xs[i]) * (xt[j] - xu[j]);
    }
  }
  return g;
}

/// Compensated sum over [s, t]:
///   sum_k y(t_k) dx^j_k + sum_l z(t_k, l) G_{t_k,t_{k+1}}(l, j).
/// `z` holds one row of D Gubinelli-derivative values per node.
inline double rough_sum(PathComponent y, std::span<const double> z, std::size_t j, const LevyAreaTable& table,
                        std::size_t s, std::size_t t) {
  const std::size_t d = table.dimension();
  detail::require(*y.grid == table.grid(), "rough_sum: integrand and table live on different grids");
  detail::require(z.size() == table.grid().nodes() * d, "rough_sum: derivative rows do not match table dimension");
  detail::require(j < d, "rough_sum: driver component out of range");
  detail::require(s <= t && t <= table.grid().steps(), "rough_sum: need s <= t <= N");
  double sum = 0.0;
  for (std::size_t k = s; k < t; ++k) {
    double compensator = 0.0;
    for (std::size_t l = 0; l < d; ++l) compensator += z[k * d + l] * table.cell(k, l, j);
    sum += y[k] * table.increment(k, j) + compensator;
  }
  return sum;
}

/// Grids up to this many steps use every node pair in area_distance.
inline constexpr std::size_t kExactAreaSteps = std::size_t{1} << 10;

/// max over node pairs s < t and entries (i, j) of |G^A_{s,t} - G^B_{s,t}| / (t - s)^exponent.
///
/// Exhaustive up to kExactAreaSteps, dyadic lags above.
inline double area_distance(const LevyAreaTable& a, const LevyAreaTable& b, double exponent) {
  detail::require(a.grid() == b.grid() && a.dimension() == b.dimension(), "area_distance: table shapes differ");
  const std::size_t steps = a.grid().steps();
  const std::size_t d = a.dimension();
  const double dt = a.grid().spacing();
  double best = 0.0;

  auto gap = [&](const double* ga, const double* gb) {
    double m = 0.0;
    for (std::size_t e = 0; e < d * d; ++e) m = std::max(m, std::abs(ga[e] - gb[e]));
    return m;
  };

  if (steps <= kExactAreaSteps) {
    std::vector<double> ga(d * d), gb(d * d);
    for (std::size_t s = 0; s < steps; ++s) {
      std::ranges::fill(ga, 0.0);
      std::ranges::fill(gb, 0.0);
      for (std::size_t k = s; k < steps; ++k) {
        a.accumulate(ga, s, k);
        b.accumulate(gb, s, k);
        const double len = static_cast<double>(k + 1 - s) * dt;
        best = std::max(best, gap(ga.data(), gb.data()) / std::pow(len, exponent));
      }
    }
    return best;
  }

  // Dyadic pyramid: level holds G_{s, s+lag} for every admissible s.
  auto pyramid_step = [d](const LevyAreaTable& table, const std::vector<double>& level, std::size_t lag,
                          std::size_t count) {
    std::vector<double> next(count * d * d);
    for (std::size_t s = 0; s < count; ++s) {
      const auto xs = table.node(s), xu = table.node(s + lag), xt = table.node(s + 2 * lag);
      const double* l = level.data() + s * d * d;
      const double* r = level.data() + (s + lag) * d * d;
      double* g = next.data() + s * d * d;
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          g[i * d + j] = l[i * d + j] + r[i * d + j] + (xu[i] - xs[i]) * (xt[j] - xu[j]);
        }
      }
    }
    return next;
  };

  std::vector<double> la = a.cell_block(), lb = b.cell_block();
  for (std::size_t lag = 1; lag <= steps; lag *= 2) {
    const std::size_t count = steps - lag + 1;
    const double scale = std::pow(static_cast<double>(lag) * dt, exponent);
    for (std::size_t s = 0; s < count; ++s) {
      best = std::max(best, gap(la.data() + s * d * d, lb.data() + s * d * d) / scale);
    }
    if (2 * lag > steps) break;
    const std::size_t next_count = steps - 2 * lag + 1;
    la = pyramid_step(a, la, lag, next_count);
    lb = pyramid_step(b, lb, lag, next_count);
  }
  return best;
}

}  // namespace mixrough
