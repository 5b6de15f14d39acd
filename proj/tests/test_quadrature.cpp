#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "spadgate/quadrature.hpp"

using namespace spadgate;

TEST(GaussRule, WeightsSumToTwoAndIntegrateHighPolynomials) {
  const auto& rule = detail::gauss_legendre_15();
  double w = 0.0;
  for (double x : rule.weights) w += x;
  EXPECT_NEAR(w, 2.0, 1e-14);
  // Exact for degree <= 29.
  const double got = detail::gauss_15([](double x) { return std::pow(x, 28); }, -1.0, 1.0);
  EXPECT_NEAR(got, 2.0 / 29.0, 1e-14);
}

TEST(IntegratePiecewise, ConstantIsExact) {
  const std::vector<double> bps{0.0, 7e-9};
  const double got = integrate_piecewise([](double) { return 3.25; }, bps);
  EXPECT_NEAR(got, 3.25 * 7e-9, 3.25 * 7e-9 * 1e-15);
}

TEST(IntegratePiecewise, ExponentialDensity) {
  const double l = 1e8;
  const double td = 10e-9;
  const std::vector<double> bps{0.0, td};
  const double got = integrate_piecewise([&](double s) { return l * std::exp(-l * s); }, bps);
  EXPECT_NEAR(got, 1.0 - std::exp(-1.0), 1e-14);
}

TEST(IntegratePiecewise, ExtraBreakpointsDoNotChangeResult) {
  const GateTiming timing(5e-9, 3e-9, 10e-9);
  const double l = 5e8;
  const auto f = [&](double s) { return l * std::exp(-l * (gate_overlap(s, timing) + s)); };
  auto bps = breakpoints_of_gate_overlap(timing, 0.0, 10e-9);
  const double base = integrate_piecewise(f, bps);
  std::vector<double> refined;
  for (std::size_t i = 0; i + 1 < bps.size(); ++i) {
    refined.push_back(bps[i]);
    refined.push_back(0.5 * (bps[i] + bps[i + 1]));
  }
  refined.push_back(bps.back());
  EXPECT_NEAR(integrate_piecewise(f, refined), base, 1e-12 * base);
}

TEST(IntegratePiecewise, Deterministic) {
  const GateTiming timing(7e-9, 2.5e-9, 10e-9);
  const auto f = [&](double s) { return std::exp(-3e8 * (gate_overlap(s, timing) + s)); };
  const auto bps = breakpoints_of_gate_overlap(timing, 0.0, 10e-9);
  const double a = integrate_piecewise(f, bps);
  const double b = integrate_piecewise(f, bps);
  EXPECT_EQ(a, b);
}

TEST(IntegratePiecewise, ReportsNonConvergence) {
  // A jump inside a piece cannot meet 1e-12 with only two bisections.
  const std::vector<double> bps{0.0, 1.0};
  QuadratureOptions opts;
  opts.max_depth = 2;
  try {
    integrate_piecewise([](double x) { return x < 0.3 ? 0.0 : 1.0; }, bps, opts);
    FAIL() << "expected QuadratureError";
  } catch (const QuadratureError& e) {
    EXPECT_GT(e.achieved_error(), e.requested_error());
  }
}

TEST(IntegratePiecewise, RejectsNonIncreasingBreakpoints) {
  const std::vector<double> bps{0.0, 1.0, 1.0};
  EXPECT_THROW(integrate_piecewise([](double) { return 1.0; }, bps), std::invalid_argument);
}

TEST(Breakpoints, FreeRunningHasNoInteriorKinks) {
  EXPECT_EQ(breakpoints_of_gate_overlap(GateTiming(20e-9, 20e-9, 10e-9), 0.0, 10e-9),
            (Breakpoints{0.0, 10e-9}));
  EXPECT_EQ(breakpoints_of_gate_overlap(GateTiming(5e-9, 5e-9, 10e-9), 0.0, 10e-9),
            (Breakpoints{0.0, 10e-9}));
}

TEST(Breakpoints, ClampNeverActiveInRange) {
  EXPECT_EQ(breakpoints_of_gate_overlap(GateTiming(20e-9, 8e-9, 10e-9), 0.0, 10e-9),
            (Breakpoints{0.0, 10e-9}));
}

TEST(Breakpoints, FloorAndClampCrossings) {
  const auto bps = breakpoints_of_gate_overlap(GateTiming(5e-9, 3e-9, 10e-9), 0.0, 10e-9);
  const std::vector<double> want{0.0, 3e-9, 5e-9, 8e-9, 10e-9};
  ASSERT_EQ(bps.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(bps[i], want[i], 1e-21);
}

TEST(Breakpoints, RejectsIntervalOutsideDeadTime) {
  EXPECT_THROW(breakpoints_of_gate_overlap(GateTiming(5e-9, 3e-9, 10e-9), 0.0, 11e-9),
               std::invalid_argument);
}

TEST(Breakpoints, GateOverlapIsAffineBetweenBreakpoints) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const auto timing = oracle::random_timing(rng);
    const auto bps = breakpoints_of_gate_overlap(timing, 0.0, timing.dead_time());
    for (std::size_t i = 0; i + 1 < bps.size(); ++i) {
      const double a = bps[i];
      const double b = bps[i + 1];
      const double ga = gate_overlap(a + 0.25 * (b - a), timing);
      const double gm = gate_overlap(a + 0.5 * (b - a), timing);
      const double gb = gate_overlap(a + 0.75 * (b - a), timing);
      EXPECT_NEAR(gm, 0.5 * (ga + gb), 1e-21);
    }
  }
}

TEST(IntegratePiecewise, GatedIntegrandMatchesDenseTrapezoid) {
  // Frozen by a 30-digit quadrature of the same integrand with window-summed G:
  // 0.14520318225367566. Also recomputed here with a 1e7-point trapezoid.
  const double l = 5e8;
  const double ts = 5e-9, tg = 3e-9, td = 10e-9;
  const GateTiming timing(ts, tg, td);
  const auto bps = breakpoints_of_gate_overlap(timing, 0.0, td);
  const double got = integrate_piecewise(
      [&](double s) { return l * std::exp(-l * (gate_overlap(s, timing) + s)); }, bps);
  EXPECT_NEAR(got, 0.14520318225367566, 1e-9 * 0.1452);
  const double trap = oracle::trapezoid(
      [&](double s) { return l * std::exp(-l * (oracle::gate_overlap_by_windows(s, ts, tg, td) + s)); },
      0.0, td, 10'000'000);
  EXPECT_NEAR(got, trap, 1e-9 * trap);
}
