#pragma once

// Concrete test models with hand-derived Jacobians.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "mixrough/errors.hpp"
#include "mixrough/models.hpp"

namespace mixrough::zoo {

using Span = std::span<const double>;
using Out = std::span<double>;

/// d = m = l = 1: a = -x, b = beta x, c = sigma x. Linear growth only.
inline SdeModel linear_scalar(ModelKind kind, double beta = 0.5, double sigma = 0.3) {
  VectorField a(1, 1, [](Span x, Out o) { o[0] = -x[0]; }, [](Span, Out o) { o[0] = -1.0; });
  VectorField b(1, 1, [beta](Span x, Out o) { o[0] = beta * x[0]; }, [beta](Span, Out o) { o[0] = beta; });
  VectorField c(1, 1, [sigma](Span x, Out o) { o[0] = sigma * x[0]; }, [sigma](Span, Out o) { o[0] = sigma; });
  return {"linear-scalar", kind, {a, b, c}, {1.0}, Hypothesis::C1LinearGrowth, false};
}

/// d = m = l = 1: a = sin x, b = (2 + cos x) / 4, c = 2 + sin x. All C_b^{2,delta}, inf c = 1.
inline SdeModel trig(ModelKind kind) {
  VectorField a(1, 1, [](Span x, Out o) { o[0] = std::sin(x[0]); }, [](Span x, Out o) { o[0] = std::cos(x[0]); });
  VectorField b(
      1, 1, [](Span x, Out o) { o[0] = 0.25 * (2.0 + std::cos(x[0])); },
      [](Span x, Out o) { o[0] = -0.25 * std::sin(x[0]); });
  VectorField c(
      1, 1, [](Span x, Out o) { o[0] = 2.0 + std::sin(x[0]); }, [](Span x, Out o) { o[0] = std::cos(x[0]); });
  return {"trig", kind, {a, b, c}, {0.5}, Hypothesis::Cb2Delta, true};
}

/// "trig" with the Brownian diffusion switched off.
inline SdeModel trig_fbm_only(ModelKind kind) {
  SdeModel model = trig(kind);
  model.name = "trig-fbm-only";
  model.coeffs.brownian = VectorField::zero(1, 1);
  return model;
}

namespace detail {
inline double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }
}  // namespace detail

/// d = 2, m = 2, l = 1 with bounded trigonometric and logistic entries.
///
///   a = (sin(x2) / 2, -sin(x1) / 2)
///   b = [[0.3 + 0.1 cos x1, 0.1 sin x2], [0.2 logistic(x1), 0.3 + 0.1 sin(x1 + x2)]]
///   c = (1 + 0.5 sin x2, 1 + 0.3 cos x1)
inline SdeModel trig_2d(ModelKind kind) {
  VectorField a(
      2, 1,
      [](Span x, Out o) {
        o[0] = 0.5 * std::sin(x[1]);
        o[1] = -0.5 * std::sin(x[0]);
      },
      [](Span x, Out o) {
        o[0] = 0.0;
        o[1] = 0.5 * std::cos(x[1]);
        o[2] = -0.5 * std::cos(x[0]);
        o[3] = 0.0;
      });
  VectorField b(
      2, 2,
      [](Span x, Out o) {
        o[0] = 0.3 + 0.1 * std::cos(x[0]);
        o[1] = 0.1 * std::sin(x[1]);
        o[2] = 0.2 * detail::logistic(x[0]);
        o[3] = 0.3 + 0.1 * std::sin(x[0] + x[1]);
      },
      [](Span x, Out o) {
        const double s = detail::logistic(x[0]);
        const double cs = 0.1 * std::cos(x[0] + x[1]);
        // entry (l, col) -> row l * 2 + col, two partials each
        o[0] = -0.1 * std::sin(x[0]);
        o[1] = 0.0;
        o[2] = 0.0;
        o[3] = 0.1 * std::cos(x[1]);
        o[4] = 0.2 * s * (1.0 - s);
        o[5] = 0.0;
        o[6] = cs;
        o[7] = cs;
      });
  VectorField c(
      2, 1,
      [](Span x, Out o) {
        o[0] = 1.0 + 0.5 * std::sin(x[1]);
        o[1] = 1.0 + 0.3 * std::cos(x[0]);
      },
      [](Span x, Out o) {
        o[0] = 0.0;
        o[1] = 0.5 * std::cos(x[1]);
        o[2] = -0.3 * std::sin(x[0]);
        o[3] = 0.0;
      });
  return {"trig-2d", kind, {a, b, c}, {0.3, -0.2}, Hypothesis::Cb2Delta, true};
}

/// Deterministic decay x' = -x (b = c = 0), exact solution x0 e^{-t}. Harness self-test only.
inline SdeModel ode_decay(ModelKind kind) {
  VectorField a(1, 1, [](Span x, Out o) { o[0] = -x[0]; }, [](Span, Out o) { o[0] = -1.0; });
  return {"ode-decay", kind, {a, VectorField::zero(1, 1), VectorField::zero(1, 1)}, {1.0},
          Hypothesis::C1LinearGrowth, false};
}

inline const std::vector<std::string>& names() {
  static const std::vector<std::string> all{"linear-scalar", "trig", "trig-fbm-only", "trig-2d", "ode-decay"};
  return all;
}

inline SdeModel make(const std::string& name, ModelKind kind) {
  if (name == "linear-scalar") return linear_scalar(kind);
  if (name == "trig") return trig(kind);
  if (name == "trig-fbm-only") return trig_fbm_only(kind);
  if (name == "trig-2d") return trig_2d(kind);
  if (name == "ode-decay") return ode_decay(kind);
  throw ContractError("unknown model '" + name + "'");
}

/// True when b and c vanish identically (checked on a few points).
inline bool is_deterministic(const SdeModel& model) {
  std::vector<double> x(model.d());
  for (double probe : {-1.3, 0.0, 0.7, 2.1}) {
    std::ranges::fill(x, probe);
    for (double v : model.coeffs.brownian(x)) {
      if (v != 0.0) return false;
    }
    for (double v : model.coeffs.fractional(x)) {
      if (v != 0.0) return false;
    }
  }
  return true;
}

}  // namespace mixrough::zoo
