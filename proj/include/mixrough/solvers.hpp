#pragma once

// Time-stepping schemes for mixed and rough SDEs driven by (W, B^H).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mixrough/calculus.hpp"
#include "mixrough/errors.hpp"
#include "mixrough/grid.hpp"
#include "mixrough/models.hpp"
#include "mixrough/paths.hpp"

namespace mixrough {

enum class Scheme { SkewedEuler, NaturalEuler, SmoothedEuler, MilsteinRough };

inline const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::SkewedEuler: return "skewed-euler";
    case Scheme::NaturalEuler: return "natural-euler";
    case Scheme::SmoothedEuler: return "smoothed-euler";
    case Scheme::MilsteinRough: return "milstein-rough";
  }
  return "?";
}

struct SolveDiagnostics {
  /// Largest |entry| of (a, b, c) evaluated at x_k, one per step.
  std::vector<double> max_coefficient;
  bool non_finite = false;
};

struct SolveOutput {
  SamplePath solution;
  SolveDiagnostics diagnostics;
};

namespace detail {

// Scratch buffers and bookkeeping shared by the explicit schemes.
class StepState {
 public:
  StepState(const SdeModel& model, const TimeGrid& grid)
      : model_(model),
        out_{SamplePath(grid, model.d()), {}},
        x_(model.x0),
        a_(model.d()),
        b_(model.d() * model.m()),
        c_(model.d() * model.l()) {
    model.validate();
    out_.diagnostics.max_coefficient.reserve(grid.steps());
    record(0);
  }

  std::span<const double> x() const { return x_; }
  std::span<double> x() { return x_; }
  const std::vector<double>& a() const { return a_; }
  const std::vector<double>& b() const { return b_; }
  const std::vector<double>& c() const { return c_; }

  void evaluate(std::size_t step) {
    model_.coeffs.drift.evaluate(x_, a_);
    model_.coeffs.brownian.evaluate(x_, b_);
    model_.coeffs.fractional.evaluate(x_, c_);
    double largest = 0.0;
    for (const auto* v : {&a_, &b_, &c_}) {
      for (double e : *v) {
        if (!std::isfinite(e)) fail(step, "non-finite coefficient value");
        largest = std::max(largest, std::abs(e));
      }
    }
    out_.diagnostics.max_coefficient.push_back(largest);
  }

  void record(std::size_t node) {
    for (std::size_t l = 0; l < x_.size(); ++l) {
      if (!std::isfinite(x_[l])) fail(node, "non-finite state");
      out_.solution(node, l) = x_[l];
    }
  }

  SolveOutput finish() { return std::move(out_); }

 private:
  [[noreturn]] void fail(std::size_t step, const std::string& what) {
    out_.diagnostics.non_finite = true;
    throw SolveError(step, model_.name + " " + what);
  }

  const SdeModel& model_;
  SolveOutput out_;
  std::vector<double> x_, a_, b_, c_;
};

inline void check_drivers(const SdeModel& model, const SamplePath& w, const SamplePath& b, const TimeGrid& grid) {
  require(w.components() == model.m(), "solver: Brownian path has the wrong number of components");
  require(b.components() == model.l(), "solver: fBm path has the wrong number of components");
  require(w.grid() == b.grid(), "solver: W and B live on different grids");
  grid.refinement_factor(w.grid());
}

}  // namespace detail

/// x_{k+1} = x_k + a Δ + b (W_{k+1} - W_k) + c (B_k - B_{k-1}), with B_{-1} = 0.
inline SolveOutput solve_skewed_euler(const SdeModel& model, const SamplePath& w, const SamplePath& bh,
                                      const TimeGrid& grid) {
  detail::require(model.kind == ModelKind::Mixed, "skewed Euler needs a mixed model");
  detail::check_drivers(model, w, bh, grid);
  const std::size_t r = grid.refinement_factor(w.grid());
  const std::size_t d = model.d(), m = model.m(), l = model.l();
  const double dt = grid.spacing();
  detail::StepState st(model, grid);
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    st.evaluate(k);
    auto x = st.x();
    for (std::size_t p = 0; p < d; ++p) {
      double bsum = 0.0, csum = 0.0;
      for (std::size_t i = 0; i < m; ++i) bsum += st.b()[p * m + i] * (w((k + 1) * r, i) - w(k * r, i));
      for (std::size_t j = 0; j < l; ++j) {
        const double lagged = k == 0 ? bh(0, j) - 0.0 : bh(k * r, j) - bh((k - 1) * r, j);
        csum += st.c()[p * l + j] * lagged;
      }
      x[p] = x[p] + st.a()[p] * dt + bsum + csum;
    }
    st.record(k + 1);
  }
  return st.finish();
}

/// x_{k+1} = x_k + (a + (1/2) sum_i D_b b^{(i)}) Δ + b ΔW_k + c ΔB_k, all increments forward.
inline SolveOutput solve_natural_euler(const SdeModel& model, const SamplePath& w, const SamplePath& bh,
                                       const TimeGrid& grid) {
  detail::require(model.kind == ModelKind::Rough, "natural Euler needs a rough model");
  detail::check_drivers(model, w, bh, grid);
  const std::size_t r = grid.refinement_factor(w.grid());
  const std::size_t d = model.d(), m = model.m(), l = model.l();
  const double dt = grid.spacing();
  const VectorField correction = ito_stratonovich_correction(model.coeffs.brownian);
  std::vector<double> shift(d);
  detail::StepState st(model, grid);
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    st.evaluate(k);
    correction.evaluate(st.x(), shift);
    auto x = st.x();
    for (std::size_t p = 0; p < d; ++p) {
      double bsum = 0.0, csum = 0.0;
      for (std::size_t i = 0; i < m; ++i) bsum += st.b()[p * m + i] * (w((k + 1) * r, i) - w(k * r, i));
      for (std::size_t j = 0; j < l; ++j) csum += st.c()[p * l + j] * (bh((k + 1) * r, j) - bh(k * r, j));
      x[p] = x[p] + (st.a()[p] + shift[p]) * dt + bsum + csum;
    }
    st.record(k + 1);
  }
  return st.finish();
}

/// Euler for the smoothed equation: x_{k+1} = x_k + (a + c dB^n/dt) Δ + b ΔW_k, Itô in W.
inline SolveOutput solve_smoothed_euler(const SdeModel& model, const SamplePath& w, const SamplePath& bh,
                                        std::size_t n, const TimeGrid& grid) {
  detail::require(model.kind == ModelKind::Mixed, "smoothed Euler needs a mixed model");
  detail::check_drivers(model, w, bh, grid);
  const SamplePath rate = smoothed_derivative(bh, n);
  const std::size_t r = grid.refinement_factor(w.grid());
  const std::size_t d = model.d(), m = model.m(), l = model.l();
  const double dt = grid.spacing();
  detail::StepState st(model, grid);
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    st.evaluate(k);
    auto x = st.x();
    for (std::size_t p = 0; p < d; ++p) {
      double push = 0.0, bsum = 0.0;
      for (std::size_t j = 0; j < l; ++j) push += st.c()[p * l + j] * rate(k * r, j);
      for (std::size_t i = 0; i < m; ++i) bsum += st.b()[p * m + i] * (w((k + 1) * r, i) - w(k * r, i));
      x[p] = x[p] + (st.a()[p] + push) * dt + bsum;
    }
    st.record(k + 1);
  }
  return st.finish();
}

/// Second-order step with sigma = (a, b, c) along g = (t, W, B):
///   x_{k+1} = x_k + sum_i sigma^{(i)} Δg^i + sum_{l,i} (D_sigma^{(l)} sigma^{(i)}) G_k(l, i).
inline SolveOutput solve_milstein_rough(const SdeModel& model, const LevyAreaTable& table, const TimeGrid& grid) {
  detail::require(model.kind == ModelKind::Rough, "Milstein rough step needs a rough model");
  detail::require(table.grid() == grid, "Milstein: area table lives on a different grid");
  detail::require(table.layout() == DriverLayout{model.m(), model.l()}, "Milstein: table layout does not match model");
  const auto& cf = model.coeffs;
  detail::require(cf.drift.has_jacobian() && cf.brownian.has_jacobian() && cf.fractional.has_jacobian(),
                  "Milstein: every coefficient needs an analytic Jacobian");
  const std::size_t d = model.d(), m = model.m(), l = model.l();
  const std::size_t dd = 1 + m + l;
  std::vector<double> ja(d * d), jb(d * m * d), jc(d * l * d);
  std::vector<double> sigma(d * dd), jsigma(d * dd * d), inc(dd), next(d);

  detail::StepState st(model, grid);
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    st.evaluate(k);
    cf.drift.jacobian(st.x(), ja);
    cf.brownian.jacobian(st.x(), jb);
    cf.fractional.jacobian(st.x(), jc);
    // sigma(q, i) and d sigma(q, i) / dx_p in the joint column order (t, W, B)
    for (std::size_t q = 0; q < d; ++q) {
      sigma[q * dd] = st.a()[q];
      for (std::size_t p = 0; p < d; ++p) jsigma[(q * dd) * d + p] = ja[q * d + p];
      for (std::size_t i = 0; i < m; ++i) {
        sigma[q * dd + 1 + i] = st.b()[q * m + i];
        for (std::size_t p = 0; p < d; ++p) jsigma[(q * dd + 1 + i) * d + p] = jb[(q * m + i) * d + p];
      }
      for (std::size_t j = 0; j < l; ++j) {
        sigma[q * dd + 1 + m + j] = st.c()[q * l + j];
        for (std::size_t p = 0; p < d; ++p) jsigma[(q * dd + 1 + m + j) * d + p] = jc[(q * l + j) * d + p];
      }
    }
    for (std::size_t i = 0; i < dd; ++i) inc[i] = table.increment(k, i);
    auto x = st.x();
    for (std::size_t q = 0; q < d; ++q) {
      double bsum = 0.0, csum = 0.0, area = 0.0;
      for (std::size_t i = 0; i < m; ++i) bsum += sigma[q * dd + 1 + i] * inc[1 + i];
      for (std::size_t j = 0; j < l; ++j) csum += sigma[q * dd + 1 + m + j] * inc[1 + m + j];
      for (std::size_t i = 0; i < dd; ++i) {
        for (std::size_t lc = 0; lc < dd; ++lc) {
          double directional = 0.0;
          for (std::size_t p = 0; p < d; ++p) directional += jsigma[(q * dd + i) * d + p] * sigma[p * dd + lc];
          area += directional * table.cell(k, lc, i);
        }
      }
      next[q] = x[q] + sigma[q * dd] * inc[0] + bsum + csum + area;
    }
    std::ranges::copy(next, x.begin());
    st.record(k + 1);
  }
  return st.finish();
}

/// Default refinement of the reference engine over the scheme grid.
inline constexpr std::size_t kDefaultReferenceRefine = 64;

/// Fine-grid oracle restricted to the coarse nodes.
///
/// The driver paths must live on coarse.refined(refine * f) for an integer f >= 1.
/// Rough models run the Milstein step on coarse.refined(refine) with areas built
/// from the f-fold finer driver; mixed models run skewed Euler on that grid.
inline SolveOutput reference_solution(const SdeModel& model, const SamplePath& w_fine, const SamplePath& b_fine,
                                      const TimeGrid& coarse, std::size_t refine = kDefaultReferenceRefine) {
  detail::require(refine >= 4, "reference_solution: refine must be at least 4");
  const TimeGrid ref_grid = coarse.refined(refine);
  detail::check_drivers(model, w_fine, b_fine, ref_grid);
  SolveOutput fine = [&] {
    if (model.kind == ModelKind::Rough) {
      const std::size_t f = ref_grid.refinement_factor(w_fine.grid());
      const auto table = build_levy_area(joint_driver(w_fine, b_fine), {model.m(), model.l()}, f);
      return solve_milstein_rough(model, table, ref_grid);
    }
    return solve_skewed_euler(model, w_fine, b_fine, ref_grid);
  }();
  SolveOutput out{restrict_to(fine.solution, coarse), {}};
  out.diagnostics.non_finite = fine.diagnostics.non_finite;
  out.diagnostics.max_coefficient.reserve(coarse.steps());
  for (std::size_t k = 0; k < coarse.steps(); ++k) {
    out.diagnostics.max_coefficient.push_back(fine.diagnostics.max_coefficient[k * refine]);
  }
  return out;
}

/// max_k |approx_k - reference_k| (Euclidean in R^d).
inline double strong_error(const SolveOutput& approx, const SolveOutput& reference) {
  const auto& a = approx.solution;
  const auto& r = reference.solution;
  detail::require(a.grid() == r.grid(), "strong_error: outputs live on different grids");
  detail::require(a.components() == r.components(), "strong_error: state dimensions differ");
  double worst = 0.0;
  for (std::size_t k = 0; k < a.grid().nodes(); ++k) {
    double sq = 0.0;
    for (std::size_t c = 0; c < a.components(); ++c) {
      const double e = a(k, c) - r(k, c);
      sq += e * e;
    }
    worst = std::max(worst, std::sqrt(sq));
  }
  return worst;
}

}  // namespace mixrough
