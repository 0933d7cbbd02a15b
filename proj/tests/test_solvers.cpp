#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "mixrough/calculus.hpp"
#include "mixrough/paths.hpp"
#include "mixrough/solvers.hpp"
#include "mixrough/zoo.hpp"

using namespace mixrough;
using Span = std::span<const double>;
using Out = std::span<double>;

namespace {

VectorField scalar(double (*f)(double), double (*df)(double)) {
  return VectorField(1, 1, [f](Span x, Out o) { o[0] = f(x[0]); }, [df](Span x, Out o) { o[0] = df(x[0]); });
}

double one_fn(double) { return 1.0; }
double id_fn(double x) { return x; }
double sin_fn(double x) { return std::sin(x); }
double cos_fn(double x) { return std::cos(x); }

SdeModel scalar_model(ModelKind kind, VectorField a, VectorField b, VectorField c, double x0 = 1.0) {
  return {"fixture", kind, {std::move(a), std::move(b), std::move(c)}, {x0}, Hypothesis::C1LinearGrowth, false};
}

struct Drivers {
  SamplePath w, b;
};

Drivers drivers(const TimeGrid& grid, std::size_t m, std::size_t l, std::uint64_t seed) {
  return {sample_brownian(grid, m, {seed, 0}), sample_fbm(grid, {0.7, l}, {seed, 0})};
}

}  // namespace

TEST(SkewedEuler, Examples) {
  const TimeGrid g(1.0, 16);
  const auto d = drivers(g, 1, 1, 1);
  const auto still = solve_skewed_euler(
      scalar_model(ModelKind::Mixed, VectorField::zero(1, 1), VectorField::zero(1, 1), VectorField::zero(1, 1), 2.0),
      d.w, d.b, g);
  const auto ramp = solve_skewed_euler(scalar_model(ModelKind::Mixed, VectorField::constant(1, 1, {1.0}),
                                                    VectorField::zero(1, 1), VectorField::zero(1, 1), 0.5),
                                       d.w, d.b, g);
  const auto walk = solve_skewed_euler(scalar_model(ModelKind::Mixed, VectorField::zero(1, 1),
                                                    VectorField::constant(1, 1, {1.0}), VectorField::zero(1, 1), 0.5),
                                       d.w, d.b, g);
  for (std::size_t k = 0; k < g.nodes(); ++k) {
    EXPECT_EQ(still.solution(k, 0), 2.0);
    EXPECT_NEAR(ramp.solution(k, 0), 0.5 + k * g.spacing(), 1e-15);
    EXPECT_NEAR(walk.solution(k, 0), 0.5 + d.w(k, 0), 1e-14);
  }
}

TEST(SkewedEuler, LaggedFbmIncrement) {
  const TimeGrid g(1.0, 8);
  const auto d = drivers(g, 1, 1, 2);
  const auto out = solve_skewed_euler(
      scalar_model(ModelKind::Mixed, VectorField::zero(1, 1), VectorField::zero(1, 1), VectorField::constant(1, 1, {1.0}), 0.0),
      d.w, d.b, g);
  // B_{-Δ} = 0 and B_0 = 0, so the first step is flat and x_k = B_{k-1}
  EXPECT_EQ(out.solution(1, 0), 0.0);
  for (std::size_t k = 1; k < g.nodes(); ++k) EXPECT_NEAR(out.solution(k, 0), d.b(k - 1, 0), 1e-14);
}

TEST(SkewedEuler, RequiresMixedModel) {
  const TimeGrid g(1.0, 8);
  const auto d = drivers(g, 1, 1, 3);
  EXPECT_THROW(solve_skewed_euler(zoo::trig(ModelKind::Rough), d.w, d.b, g), ContractError);
  EXPECT_THROW(solve_skewed_euler(zoo::trig(ModelKind::Mixed), d.w, d.b, TimeGrid(1.0, 3)), ContractError);
}

TEST(NaturalEuler, ConstantDiffusion) {
  const TimeGrid g(1.0, 32);
  const auto d = drivers(g, 1, 1, 4);
  const auto out = solve_natural_euler(scalar_model(ModelKind::Rough, VectorField::zero(1, 1),
                                                    VectorField::constant(1, 1, {0.3}), VectorField::zero(1, 1), 1.0),
                                       d.w, d.b, g);
  for (std::size_t k = 0; k < g.nodes(); ++k) EXPECT_NEAR(out.solution(k, 0), 1.0 + 0.3 * d.w(k, 0), 1e-14);
}

TEST(NaturalEuler, HandStep) {
  const TimeGrid g(1.0, 2);
  SamplePath w(g, 1), b(g, 1);
  w(1, 0) = 0.2;
  w(2, 0) = 0.2;
  const auto out = solve_natural_euler(
      scalar_model(ModelKind::Rough, VectorField::zero(1, 1), scalar(id_fn, one_fn), VectorField::zero(1, 1), 1.0), w,
      b, g);
  EXPECT_NEAR(out.solution(1, 0), 1.45, 1e-15);
}

TEST(SmoothedEuler, BitIdenticalToSkewedWithoutFbm) {
  const TimeGrid g(1.0, 64);
  const auto d = drivers(g, 1, 1, 5);
  auto model = zoo::trig(ModelKind::Mixed);
  model.coeffs.fractional = VectorField::zero(1, 1);
  const auto skew = solve_skewed_euler(model, d.w, d.b, g);
  const auto smooth = solve_smoothed_euler(model, d.w, d.b, 8, g);
  for (std::size_t k = 0; k < g.nodes(); ++k) EXPECT_EQ(skew.solution(k, 0), smooth.solution(k, 0));
}

TEST(SmoothedEuler, ZeroFbmReducesToItoEuler) {
  const TimeGrid g(1.0, 64);
  const auto d = drivers(g, 1, 1, 6);
  const SamplePath zero_b(g, 1);
  const auto model = zoo::trig(ModelKind::Mixed);
  const auto smooth = solve_smoothed_euler(model, d.w, zero_b, 16, g);
  const auto skew = solve_skewed_euler(model, d.w, zero_b, g);
  for (std::size_t k = 0; k < g.nodes(); ++k) EXPECT_EQ(skew.solution(k, 0), smooth.solution(k, 0));
}

TEST(SmoothedEuler, ApproachesSkewedAsWindowShrinks) {
  const TimeGrid g(1.0, 1024);
  const auto model = zoo::trig(ModelKind::Mixed);
  double coarse = 0.0, fine = 0.0;
  for (std::uint64_t p = 0; p < 20; ++p) {
    const auto d = drivers(g, 1, 1, 100 + p);
    const auto skew = solve_skewed_euler(model, d.w, d.b, g);
    coarse += strong_error(solve_smoothed_euler(model, d.w, d.b, 8, g), skew);
    fine += strong_error(solve_smoothed_euler(model, d.w, d.b, 256, g), skew);
  }
  EXPECT_LT(fine, coarse);
}

TEST(Schemes, CoincideWithoutNoise) {
  const TimeGrid g(2.0, 40);
  const auto d = drivers(g, 1, 1, 7);
  const auto a = scalar(sin_fn, cos_fn);
  const auto mixed = scalar_model(ModelKind::Mixed, a, VectorField::zero(1, 1), VectorField::zero(1, 1), 0.4);
  const auto rough = scalar_model(ModelKind::Rough, a, VectorField::zero(1, 1), VectorField::zero(1, 1), 0.4);
  const auto skew = solve_skewed_euler(mixed, d.w, d.b, g);
  const auto nat = solve_natural_euler(rough, d.w, d.b, g);
  const auto smooth = solve_smoothed_euler(mixed, d.w, d.b, 4, g);
  double x = 0.4;
  for (std::size_t k = 0; k < g.nodes(); ++k) {
    EXPECT_EQ(skew.solution(k, 0), x);
    EXPECT_EQ(nat.solution(k, 0), x);
    EXPECT_EQ(smooth.solution(k, 0), x);
    x = x + std::sin(x) * g.spacing();
  }
  // Milstein adds a' a Δ^2 / 2, so only a constant drift reproduces forward Euler exactly
  const auto flat = scalar_model(ModelKind::Rough, VectorField::constant(1, 1, {0.7}), VectorField::zero(1, 1),
                                 VectorField::zero(1, 1), 0.4);
  const auto table = build_levy_area(joint_driver(d.w, d.b), {1, 1}, 1);
  const auto mil = solve_milstein_rough(flat, table, g);
  for (std::size_t k = 0; k < g.nodes(); ++k) EXPECT_NEAR(mil.solution(k, 0), 0.4 + 0.7 * g.time(k), 1e-14);
}

TEST(Milstein, ConstantCoefficientsArePlainIncrements) {
  const TimeGrid fine(1.0, 128);
  const auto d = drivers(fine, 1, 1, 8);
  const auto table = build_levy_area(joint_driver(d.w, d.b), {1, 1}, 4);
  const auto model = scalar_model(ModelKind::Rough, VectorField::constant(1, 1, {0.2}),
                                  VectorField::constant(1, 1, {0.5}), VectorField::constant(1, 1, {-1.0}), 1.0);
  const auto out = solve_milstein_rough(model, table, table.grid());
  for (std::size_t k = 0; k < table.grid().nodes(); ++k) {
    const std::size_t f = 4 * k;
    EXPECT_NEAR(out.solution(k, 0), 1.0 + 0.2 * fine.time(f) + 0.5 * d.w(f, 0) - d.b(f, 0), 1e-13);
  }
}

TEST(Milstein, LinearBrownianStep) {
  const TimeGrid g(1.0, 4);
  SamplePath w(g, 1), b(g, 1);
  w(1, 0) = 0.3;
  w(2, 0) = -0.1;
  w(3, 0) = 0.05;
  w(4, 0) = 0.5;
  const auto table = build_levy_area(joint_driver(w, b), {1, 1}, 1);
  const auto model =
      scalar_model(ModelKind::Rough, VectorField::zero(1, 1), scalar(id_fn, one_fn), VectorField::zero(1, 1), 1.0);
  const auto out = solve_milstein_rough(model, table, g);
  double x = 1.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const double dw = w(k + 1, 0) - w(k, 0);
    x = x + x * dw + x * 0.5 * dw * dw;
    EXPECT_NEAR(out.solution(k + 1, 0), x, 1e-15);
  }
}

TEST(Milstein, NeedsJacobiansAndMatchingTable) {
  const TimeGrid g(1.0, 16);
  const auto d = drivers(g, 1, 1, 9);
  const auto table = build_levy_area(joint_driver(d.w, d.b), {1, 1}, 1);
  const auto mixed = to_mixed(zoo::trig(ModelKind::Rough));
  auto no_jac = zoo::trig(ModelKind::Rough);
  no_jac.coeffs.drift = mixed.coeffs.drift;
  EXPECT_THROW(solve_milstein_rough(no_jac, table, g), ContractError);
  EXPECT_THROW(solve_milstein_rough(zoo::trig_2d(ModelKind::Rough), table, g), ContractError);
  EXPECT_THROW(solve_milstein_rough(zoo::trig(ModelKind::Rough), table, TimeGrid(1.0, 8)), ContractError);
}

// One step from many states: Milstein and natural Euler differ by the area terms only.
TEST(Milstein, OneStepCloseToNaturalEuler) {
  const auto model = zoo::trig(ModelKind::Rough);
  const double h = 0.75;
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> state(-3.0, 3.0);
  for (double dt : {1.0 / 64, 1.0 / 1024}) {
    double worst = 0.0;
    for (std::size_t trial = 0; trial < 1000; ++trial) {
      const TimeGrid fine(2 * dt, 32);
      const TimeGrid one(2 * dt, 2);
      const auto w = sample_brownian(fine, 1, {trial, 1});
      const auto b = sample_fbm(fine, {h, 1}, {trial, 1});
      auto m = model;
      m.x0 = {state(rng)};
      const auto table = build_levy_area(joint_driver(w, b), {1, 1}, 16);
      const auto mil = solve_milstein_rough(m, table, one);
      const auto nat = solve_natural_euler(m, restrict_to(w, one), restrict_to(b, one), one);
      worst = std::max(worst, std::abs(mil.solution(1, 0) - nat.solution(1, 0)));
    }
    // C Δ^{2γ} with γ = 1/2; the constant covers the tail of 1000 draws
    EXPECT_LE(worst, 20.0 * dt) << dt;
  }
}

TEST(Reference, DecayMatchesExactSolution) {
  const auto model = zoo::ode_decay(ModelKind::Rough);
  const TimeGrid coarse(1.0, 16);
  const std::size_t refine = 64;
  const TimeGrid fine = coarse.refined(refine * 2);
  const auto d = drivers(fine, 1, 1, 11);
  const auto ref = reference_solution(model, d.w, d.b, coarse, refine);
  const double dt_fine = coarse.spacing() / refine;
  for (std::size_t k = 0; k < coarse.nodes(); ++k) {
    EXPECT_LE(std::abs(ref.solution(k, 0) - std::exp(-coarse.time(k))), 10 * dt_fine);
  }
  EXPECT_THROW(reference_solution(model, d.w, d.b, coarse, 2), ContractError);
}

TEST(Reference, RestrictionIsNodeExtraction) {
  const auto model = zoo::trig(ModelKind::Mixed);
  const TimeGrid coarse(1.0, 8);
  const TimeGrid fine = coarse.refined(16);
  const auto d = drivers(fine, 1, 1, 12);
  const auto ref = reference_solution(model, d.w, d.b, coarse, 16);
  const auto full = solve_skewed_euler(model, d.w, d.b, fine);
  for (std::size_t k = 0; k < coarse.nodes(); ++k) EXPECT_EQ(ref.solution(k, 0), full.solution(16 * k, 0));
}

TEST(StrongError, Examples) {
  const TimeGrid g(1.0, 8);
  SolveOutput a{SamplePath(g, 2), {}};
  for (std::size_t k = 0; k < g.nodes(); ++k) a.solution(k, 0) = std::sin(double(k));
  SolveOutput b = a;
  EXPECT_EQ(strong_error(a, b), 0.0);
  b.solution(5, 1) += 1e-3;
  EXPECT_DOUBLE_EQ(strong_error(a, b), 1e-3);
  SolveOutput c{SamplePath(TimeGrid(1.0, 4), 2), {}};
  EXPECT_THROW(strong_error(a, c), ContractError);
}

TEST(Solvers, AbortOnNonFiniteState) {
  const TimeGrid g(1.0, 64);
  const auto d = drivers(g, 1, 1, 13);
  const auto blowup = scalar_model(
      ModelKind::Mixed, VectorField(1, 1, [](Span x, Out o) { o[0] = x[0] > 10 ? std::numeric_limits<double>::infinity() : 1e3 * x[0]; }),
      VectorField::zero(1, 1), VectorField::zero(1, 1), 1.0);
  try {
    solve_skewed_euler(blowup, d.w, d.b, g);
    FAIL() << "expected SolveError";
  } catch (const SolveError& e) {
    EXPECT_LT(e.step(), g.steps());
  }
}

TEST(Solvers, DiagnosticsRecorded) {
  const TimeGrid g(1.0, 32);
  const auto d = drivers(g, 1, 1, 14);
  const auto out = solve_natural_euler(zoo::trig(ModelKind::Rough), d.w, d.b, g);
  ASSERT_EQ(out.diagnostics.max_coefficient.size(), g.steps());
  EXPECT_FALSE(out.diagnostics.non_finite);
  for (double v : out.diagnostics.max_coefficient) {
    EXPECT_GT(v, 0.0);
    EXPECT_LE(v, 3.0);
  }
  EXPECT_EQ(out.solution(0, 0), 0.5);
}

TEST(Solvers, MultiDimensionalModelRuns) {
  const TimeGrid g(1.0, 64);
  const auto d = drivers(g.refined(4), 2, 1, 15);
  const auto rough = zoo::trig_2d(ModelKind::Rough);
  const auto nat = solve_natural_euler(rough, d.w, d.b, g);
  const auto skew = solve_skewed_euler(to_mixed(rough), d.w, d.b, g);
  const auto table = build_levy_area(joint_driver(d.w, d.b), {2, 1}, 4);
  const auto mil = solve_milstein_rough(rough, table, g);
  EXPECT_TRUE(nat.solution.all_finite());
  EXPECT_LT(strong_error(nat, mil), 1.0);
  EXPECT_LT(strong_error(skew, mil), 1.0);
}
