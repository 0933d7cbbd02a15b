#pragma once

// Coefficient fields with analytic Jacobians, the directional operators
// D_c^{(i)} = sum_l c_{l,i} d/dx_l, and the drift corrections that translate
// between mixed (Itô) and rough (Stratonovich) formulations.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mixrough/errors.hpp"

namespace mixrough {

/// Map x in R^d to a d x k matrix (k = 1 for drift-like fields).
///
/// Values are row-major: entry (l, col) sits at l * k + col. The Jacobian stores
/// d(value(l, col)) / dx_p at (l * k + col) * d + p. Fields produced by apply_D and
/// the drift transforms carry no Jacobian (they would need second derivatives).
class VectorField {
 public:
  using Kernel = std::function<void(std::span<const double> x, std::span<double> out)>;

  VectorField(std::size_t dim, std::size_t cols, Kernel value, Kernel jacobian = {})
      : dim_(dim), cols_(cols), value_(std::move(value)), jacobian_(std::move(jacobian)) {
    detail::require(dim >= 1, "VectorField: dimension must be positive");
    detail::require(static_cast<bool>(value_), "VectorField: missing value kernel");
  }

  /// The constant field x -> value.
  static VectorField constant(std::size_t dim, std::size_t cols, std::vector<double> value) {
    detail::require(value.size() == dim * cols, "VectorField::constant: value has the wrong size");
    auto shared = std::make_shared<const std::vector<double>>(std::move(value));
    return VectorField(
        dim, cols, [shared](std::span<const double>, std::span<double> out) { std::ranges::copy(*shared, out.begin()); },
        [](std::span<const double>, std::span<double> out) { std::ranges::fill(out, 0.0); });
  }

  static VectorField zero(std::size_t dim, std::size_t cols) {
    return constant(dim, cols, std::vector<double>(dim * cols, 0.0));
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t value_size() const noexcept { return dim_ * cols_; }
  std::size_t jacobian_size() const noexcept { return dim_ * cols_ * dim_; }
  bool has_jacobian() const noexcept { return static_cast<bool>(jacobian_); }

  void evaluate(std::span<const double> x, std::span<double> out) const {
    detail::require(x.size() == dim_ && out.size() == value_size(), "VectorField::evaluate: shape mismatch");
    value_(x, out);
  }

  void jacobian(std::span<const double> x, std::span<double> out) const {
    detail::require(has_jacobian(), "VectorField::jacobian: field has no analytic Jacobian");
    detail::require(x.size() == dim_ && out.size() == jacobian_size(), "VectorField::jacobian: shape mismatch");
    jacobian_(x, out);
  }

  std::vector<double> operator()(std::span<const double> x) const {
    std::vector<double> out(value_size());
    evaluate(x, out);
    return out;
  }

  std::vector<double> jacobian(std::span<const double> x) const {
    std::vector<double> out(jacobian_size());
    jacobian(x, out);
    return out;
  }

 private:
  std::size_t dim_;
  std::size_t cols_;
  Kernel value_;
  Kernel jacobian_;
};

/// Which existence theory a coefficient set is declared to satisfy.
enum class Hypothesis {
  C1LinearGrowth,  // C^1, linear growth, bounded Dc: enough for the mixed equation only
  Cb2Delta,        // C_b^{2,delta}: covers the rough equation and both transforms
};

inline const char* to_string(Hypothesis h) {
  return h == Hypothesis::Cb2Delta ? "C_b^{2,delta}" : "C^1 linear growth";
}

/// Drift a (d), Brownian diffusion b (d x m) and fBm diffusion c (d x l).
struct CoefficientSet {
  VectorField drift;
  VectorField brownian;
  VectorField fractional;

  std::size_t dim() const noexcept { return drift.dim(); }
  std::size_t brownian_dim() const noexcept { return brownian.cols(); }
  std::size_t fractional_dim() const noexcept { return fractional.cols(); }

  void validate() const {
    detail::require(drift.cols() == 1, "CoefficientSet: drift must be vector valued");
    detail::require(brownian.dim() == drift.dim() && fractional.dim() == drift.dim(),
                    "CoefficientSet: fields disagree on the state dimension");
  }
};

enum class ModelKind { Mixed, Rough };

inline const char* to_string(ModelKind k) { return k == ModelKind::Mixed ? "mixed" : "rough"; }

/// Coefficients plus interpretation of the Brownian integral (Itô for Mixed,
/// Stratonovich/rough for Rough) and an initial value.
struct SdeModel {
  std::string name;
  ModelKind kind;
  CoefficientSet coeffs;
  std::vector<double> x0;
  Hypothesis hypothesis = Hypothesis::C1LinearGrowth;
  bool fbm_diffusion_bounded_below = false;

  std::size_t d() const noexcept { return coeffs.dim(); }
  std::size_t m() const noexcept { return coeffs.brownian_dim(); }
  std::size_t l() const noexcept { return coeffs.fractional_dim(); }

  void validate() const {
    coeffs.validate();
    detail::require(x0.size() == coeffs.dim(), "SdeModel: x0 has the wrong dimension");
  }
};

/// (D_c^{(i)} f)(x) = J_f(x) c^{(i)}(x).
inline VectorField apply_D(const VectorField& c, std::size_t i, const VectorField& f) {
  detail::require(i < c.cols(), "apply_D: column index out of range");
  detail::require(c.dim() == f.dim(), "apply_D: state dimensions differ");
  detail::require(f.has_jacobian(), "apply_D: f needs an analytic Jacobian");
  const std::size_t d = f.dim();
  const std::size_t out_size = f.value_size();
  return VectorField(f.dim(), f.cols(), [c, i, f, d, out_size](std::span<const double> x, std::span<double> out) {
    std::vector<double> cv(c.value_size()), jf(f.jacobian_size());
    c.evaluate(x, cv);
    f.jacobian(x, jf);
    for (std::size_t e = 0; e < out_size; ++e) {
      double acc = 0.0;
      for (std::size_t p = 0; p < d; ++p) acc += jf[e * d + p] * cv[p * c.cols() + i];
      out[e] = acc;
    }
  });
}

/// (1/2) sum_i D_b^{(i)} b^{(i)}, the Itô-Stratonovich drift shift.
inline VectorField ito_stratonovich_correction(const VectorField& b) {
  detail::require(b.has_jacobian(), "ito_stratonovich_correction: b needs an analytic Jacobian");
  const std::size_t d = b.dim();
  const std::size_t m = b.cols();
  return VectorField(d, 1, [b, d, m](std::span<const double> x, std::span<double> out) {
    std::vector<double> bv(b.value_size()), jb(b.jacobian_size());
    b.evaluate(x, bv);
    b.jacobian(x, jb);
    for (std::size_t l = 0; l < d; ++l) {
      double acc = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < d; ++p) acc += jb[(l * m + i) * d + p] * bv[p * m + i];
      }
      out[l] = 0.5 * acc;
    }
  });
}

namespace detail {

inline VectorField shifted_drift(const VectorField& drift, const VectorField& shift, double sign) {
  const std::size_t d = drift.dim();
  return VectorField(d, 1, [drift, shift, sign, d](std::span<const double> x, std::span<double> out) {
    std::vector<double> s(d);
    drift.evaluate(x, out);
    shift.evaluate(x, s);
    for (std::size_t l = 0; l < d; ++l) out[l] += sign * s[l];
  });
}

}  // namespace detail

/// a^M = a^R + (1/2) sum_i D_b b^{(i)}; b and c are shared unchanged.
inline CoefficientSet mixed_from_rough(const CoefficientSet& rough) {
  rough.validate();
  return {detail::shifted_drift(rough.drift, ito_stratonovich_correction(rough.brownian), 1.0), rough.brownian,
          rough.fractional};
}

/// a^R = a^M - (1/2) sum_i D_b b^{(i)}; b and c are shared unchanged.
inline CoefficientSet rough_from_mixed(const CoefficientSet& mixed) {
  mixed.validate();
  return {detail::shifted_drift(mixed.drift, ito_stratonovich_correction(mixed.brownian), -1.0), mixed.brownian,
          mixed.fractional};
}

/// Model-level transforms: reinterpret a rough model as the equivalent mixed one and back.
inline SdeModel to_mixed(const SdeModel& rough) {
  detail::require(rough.kind == ModelKind::Rough, "to_mixed: model is already mixed");
  SdeModel out = rough;
  out.kind = ModelKind::Mixed;
  out.coeffs = mixed_from_rough(rough.coeffs);
  return out;
}

inline SdeModel to_rough(const SdeModel& mixed) {
  detail::require(mixed.kind == ModelKind::Mixed, "to_rough: model is already rough");
  SdeModel out = mixed;
  out.kind = ModelKind::Rough;
  out.coeffs = rough_from_mixed(mixed.coeffs);
  return out;
}

/// Max-entry gap between the analytic Jacobian and central differences with step h.
inline double jacobian_check(const VectorField& f, std::span<const double> x, double h) {
  detail::require(h > 0.0, "jacobian_check: h must be positive");
  const std::size_t d = f.dim();
  const auto analytic = f.jacobian(x);
  std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end());
  std::vector<double> fp(f.value_size()), fm(f.value_size());
  double worst = 0.0;
  for (std::size_t p = 0; p < d; ++p) {
    xp[p] = x[p] + h;
    xm[p] = x[p] - h;
    f.evaluate(xp, fp);
    f.evaluate(xm, fm);
    for (std::size_t e = 0; e < f.value_size(); ++e) {
      const double numeric = (fp[e] - fm[e]) / (2.0 * h);
      worst = std::max(worst, std::abs(numeric - analytic[e * d + p]));
    }
    xp[p] = x[p];
    xm[p] = x[p];
  }
  return worst;
}

}  // namespace mixrough
