#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mixrough/calculus.hpp"
#include "mixrough/paths.hpp"

using namespace mixrough;

namespace {

LevyAreaTable random_table(std::size_t steps, DriverLayout layout, std::uint64_t seed) {
  const std::size_t d = layout.dimension();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> nodes((steps + 1) * d), cells(steps * d * d);
  for (double& v : nodes) v = normal(rng);
  for (double& v : cells) v = normal(rng);
  return LevyAreaTable(TimeGrid(1.0, steps), layout, nodes, cells);
}

LevyAreaTable sampled_table(std::size_t coarse_steps, std::size_t ff, DriverLayout layout, std::uint64_t seed) {
  const TimeGrid fine(1.0, coarse_steps * ff);
  const auto w = sample_brownian(fine, layout.brownian, {seed, 0});
  const auto b = sample_fbm(fine, {0.7, layout.fractional}, {seed, 0});
  return build_levy_area(joint_driver(w, b), layout, ff);
}

double rel_gap(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

}  // namespace

TEST(DiscreteIntegral, Telescoping) {
  const TimeGrid g(1.0, 32);
  const auto w = sample_brownian(g, 1, {1, 0});
  SamplePath one(g, 1);
  for (std::size_t k = 0; k < g.nodes(); ++k) one(k, 0) = 1.0;
  for (auto rule : {IntegralRule::LeftPoint, IntegralRule::Trapezoid}) {
    EXPECT_NEAR(discrete_integral(one.component(0), w.component(0), rule, 3, 29), w(29, 0) - w(3, 0), 1e-14);
  }
}

TEST(DiscreteIntegral, ItoAndTrapezoidSelfIntegrals) {
  const TimeGrid g(1.0, 1000);
  const auto w = sample_brownian(g, 1, {2, 0});
  const auto f = w.component(0);
  const double wt = w(1000, 0);
  const double qv = quadratic_variation(f, 0, 1000);
  EXPECT_NEAR(discrete_integral(f, f, IntegralRule::LeftPoint, 0, 1000), 0.5 * (wt * wt - qv), 1e-12);
  EXPECT_NEAR(discrete_integral(f, f, IntegralRule::Trapezoid, 0, 1000), 0.5 * wt * wt, 1e-12);
}

TEST(DiscreteIntegral, SquareExample) {
  const TimeGrid g(1.0, 8);
  SamplePath p(g, 1);
  for (std::size_t k = 0; k < g.nodes(); ++k) p(k, 0) = g.time(k) * g.time(k);
  EXPECT_NEAR(discrete_integral(p.component(0), p.component(0), IntegralRule::Trapezoid, 0, 8), 0.5, 1e-15);
}

TEST(DiscreteIntegral, Additive) {
  const TimeGrid g(1.0, 64);
  const auto w = sample_brownian(g, 2, {3, 0});
  for (auto rule : {IntegralRule::LeftPoint, IntegralRule::Trapezoid}) {
    const double whole = discrete_integral(w.component(0), w.component(1), rule, 5, 60);
    const double split = discrete_integral(w.component(0), w.component(1), rule, 5, 21) +
                         discrete_integral(w.component(0), w.component(1), rule, 21, 60);
    EXPECT_NEAR(whole, split, 1e-14);
  }
}

TEST(DiscreteIntegral, MismatchedGrids) {
  const auto a = sample_brownian(TimeGrid(1.0, 8), 1, {1, 0});
  const auto b = sample_brownian(TimeGrid(1.0, 16), 1, {1, 0});
  EXPECT_THROW(discrete_integral(a.component(0), b.component(0), IntegralRule::LeftPoint, 0, 8), ContractError);
}

TEST(LevyArea, TimeTimeEntry) {
  const auto t = sampled_table(16, 4, {1, 1}, 5);
  const double dt = t.grid().spacing();
  for (std::size_t k = 0; k < 16; ++k) EXPECT_NEAR(t.cell(k, 0, 0), 0.5 * dt * dt, 1e-16);
  const auto g = t.area(3, 11);
  const double len = 8 * dt;
  EXPECT_NEAR(g[0], 0.5 * len * len, 1e-15);
  EXPECT_NEAR(chen_extend(t, 0, 8, 16)(0, 0), 0.5, 1e-15);
}

TEST(LevyArea, BrownianDiagonalIsHalfSquare) {
  const auto t = sampled_table(16, 8, {2, 1}, 6);
  for (std::size_t k = 0; k < 16; ++k) {
    for (std::size_t i : {1, 2}) {
      const double inc = t.increment(k, i);
      EXPECT_EQ(t.cell(k, i, i), 0.5 * inc * inc);
    }
  }
}

TEST(LevyArea, SymmetricPartIsProductOfIncrements) {
  const auto t = sampled_table(32, 8, {2, 2}, 7);
  const std::size_t d = t.dimension();
  for (std::size_t s : {0u, 5u}) {
    for (std::size_t e : {9u, 32u}) {
      const auto g = t.area(s, e);
      const auto xs = t.node(s), xe = t.node(e);
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          const double prod = (xe[i] - xs[i]) * (xe[j] - xs[j]);
          EXPECT_NEAR(g[i * d + j] + g[j * d + i], prod, 1e-12 * std::max(1.0, std::abs(prod)));
        }
      }
    }
  }
}

// Independent oracle: nested double Riemann sum over the fine grid, O(n^2).
TEST(LevyArea, FbmPairMatchesDoubleSum) {
  const std::size_t coarse = 4, ff = 64;
  const TimeGrid fine(1.0, coarse * ff);
  const auto b = sample_fbm(fine, {0.75, 2}, {8, 0});
  const SamplePath none(fine, 0);
  const auto table = build_levy_area(joint_driver(none, b), {0, 2}, ff);
  for (std::size_t k = 0; k < coarse; ++k) {
    double g12 = 0.0, g21 = 0.0;
    for (std::size_t v = k * ff; v < (k + 1) * ff; ++v) {
      const double dv1 = b(v + 1, 0) - b(v, 0), dv2 = b(v + 1, 1) - b(v, 1);
      for (std::size_t u = k * ff; u < v; ++u) {
        g12 += (b(u + 1, 0) - b(u, 0)) * dv2;
        g21 += (b(u + 1, 1) - b(u, 1)) * dv1;
      }
      g12 += 0.5 * dv1 * dv2;
      g21 += 0.5 * dv2 * dv1;
    }
    const double anti = table.cell(k, 1, 2) - table.cell(k, 2, 1);
    EXPECT_NEAR(anti, g12 - g21, 1e-10 * std::max(1e-3, std::abs(g12 - g21)));
    EXPECT_NEAR(table.cell(k, 1, 2), g12, 1e-12);
  }
}

TEST(LevyArea, RejectsBadDriver) {
  const TimeGrid fine(1.0, 32);
  const auto w = sample_brownian(fine, 1, {1, 0});
  const auto b = sample_fbm(fine, {0.7, 1}, {1, 0});
  const auto g = joint_driver(w, b);
  EXPECT_THROW(build_levy_area(g, {1, 1}, 5), ContractError);
  EXPECT_THROW(build_levy_area(g, {2, 1}, 4), ContractError);
  SamplePath swapped(fine, 3);
  for (std::size_t k = 0; k < fine.nodes(); ++k) {
    swapped(k, 0) = w(k, 0);
    swapped(k, 1) = fine.time(k);
    swapped(k, 2) = b(k, 0);
  }
  EXPECT_THROW(build_levy_area(swapped, {1, 1}, 4), ContractError);
}

TEST(Chen, DegenerateSplit) {
  const auto t = sampled_table(16, 4, {1, 1}, 9);
  const auto direct = t.area(2, 9);
  const std::size_t d = t.dimension();
  for (std::size_t u : {2u, 9u}) {
    const auto g = chen_extend(t, 2, u, 9);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) EXPECT_NEAR(g(i, j), direct[i * d + j], 1e-15);
    }
  }
  EXPECT_THROW(chen_extend(t, 5, 3, 9), ContractError);
}

TEST(Chen, BracketingOnRandomTables) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto t = random_table(12, {1, 1}, seed);
    const std::size_t d = t.dimension();
    for (std::size_t s = 0; s <= 12; ++s) {
      for (std::size_t e = s; e <= 12; ++e) {
        const auto direct = t.area(s, e);
        for (std::size_t u = s; u <= e; ++u) {
          const auto g = chen_extend(t, s, u, e);
          for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
              ASSERT_LE(rel_gap(g(i, j), direct[i * d + j]), 1e-12) << seed << " " << s << " " << u << " " << e;
            }
          }
        }
      }
    }
  }
}

TEST(Chen, ConventionMatchesIteratedIntegral) {
  // x = (t, t^2) sampled finely: G(0,1) over [0,1] -> int_0^1 u d(u^2) = 2/3
  const std::size_t coarse = 8, ff = 512;
  const TimeGrid fine(1.0, coarse * ff);
  SamplePath w(fine, 1);
  for (std::size_t k = 0; k < fine.nodes(); ++k) w(k, 0) = fine.time(k) * fine.time(k);
  const auto t = build_levy_area(joint_driver(w, SamplePath(fine, 0)), {1, 0}, ff);
  EXPECT_NEAR(t.area(0, coarse)[1], 2.0 / 3.0, 1e-6);
  EXPECT_NEAR(chen_extend(t, 0, 3, coarse)(0, 1), 2.0 / 3.0, 1e-6);
}

TEST(RoughSum, ZeroDerivativeIsLeftPoint) {
  const TimeGrid fine(1.0, 256);
  const auto w = sample_brownian(fine, 1, {4, 0});
  const auto b = sample_fbm(fine, {0.7, 1}, {4, 0});
  const auto t = build_levy_area(joint_driver(w, b), {1, 1}, 8);
  const auto bc = restrict_to(b, t.grid());
  const auto wc = restrict_to(w, t.grid());
  const std::vector<double> z(t.grid().nodes() * 3, 0.0);
  EXPECT_EQ(rough_sum(bc.component(0), z, 1, t, 0, 32),
            discrete_integral(bc.component(0), wc.component(0), IntegralRule::LeftPoint, 0, 32));
}

TEST(RoughSum, ConstantIntegrandClosedForm) {
  const auto t = sampled_table(16, 4, {1, 1}, 10);
  SamplePath y(t.grid(), 1);
  for (std::size_t k = 0; k < t.grid().nodes(); ++k) y(k, 0) = 2.5;
  std::vector<double> z(t.grid().nodes() * 3, 0.0);
  for (std::size_t k = 0; k < t.grid().nodes(); ++k) z[k * 3] = -1.5;
  const double dt = t.grid().spacing();
  // along time with z on the time row: 2.5 (t - s) - 1.5 * cells * dt^2 / 2
  EXPECT_NEAR(rough_sum(y.component(0), z, 0, t, 4, 12), 2.5 * 8 * dt - 1.5 * 8 * 0.5 * dt * dt, 1e-14);
  EXPECT_THROW(rough_sum(y.component(0), std::vector<double>(5), 0, t, 0, 4), ContractError);
}

TEST(AreaDistance, Examples) {
  const auto a = random_table(16, {1, 1}, 1);
  EXPECT_EQ(area_distance(a, a, 0.6), 0.0);
  auto cells = a.cell_block();
  const double eps = 1e-3;
  cells[5 * 9 + 4] += eps;
  const LevyAreaTable b(a.grid(), a.layout(), a.node_block(), cells);
  EXPECT_GE(area_distance(a, b, 0.6), eps / std::pow(a.grid().spacing(), 0.6) * (1 - 1e-9));
  EXPECT_THROW(area_distance(a, random_table(8, {1, 1}, 1), 0.6), ContractError);
}

TEST(AreaDistance, DyadicBranchAgreesOnDyadicPairs) {
  // above the exhaustive threshold only dyadic lags are visited, so a perturbation on one cell is still seen
  const std::size_t steps = kExactAreaSteps * 2;
  const auto a = random_table(steps, {0, 1}, 3);
  auto cells = a.cell_block();
  cells[700 * 4 + 3] += 0.25;
  const LevyAreaTable b(a.grid(), a.layout(), a.node_block(), cells);
  EXPECT_GE(area_distance(a, b, 0.5), 0.25 / std::sqrt(a.grid().spacing()) * (1 - 1e-9));
}

TEST(QuadraticVariation, MeanIsHorizon) {
  const TimeGrid g(2.0, 64);
  const std::size_t paths = 10000;
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t p = 0; p < paths; ++p) {
    const auto w = sample_brownian(g, 1, {12, p});
    const double q = quadratic_variation(w.component(0), 0, 64);
    sum += q;
    sum2 += q * q;
  }
  const double mean = sum / paths;
  const double se = std::sqrt((sum2 / paths - mean * mean) / paths);
  EXPECT_LE(std::abs(mean - 2.0), 4 * se);
}
