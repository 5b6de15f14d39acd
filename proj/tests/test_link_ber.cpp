#include <gtest/gtest.h>

#include <cmath>

#include "spadgate/link_ber.hpp"

using namespace spadgate;

namespace {
constexpr double ns = 1e-9;
constexpr double nW = 1e-9;

OpticalLink small_array(double pb_nw, double pr_nw) {
  OpticalLink l;
  l.array_size = 64;
  l.timing = GateTiming(20 * ns, 20 * ns, 10 * ns);
  l.background_power = pb_nw * nW;
  l.received_power = pr_nw * nW;
  return l;
}

OpticalLink large_array(double pb_nw, double pr_nw) {
  OpticalLink l = small_array(pb_nw, pr_nw);
  l.array_size = 1024;
  l.timing = GateTiming(5 * ns, 5 * ns, 10 * ns);
  return l;
}
}  // namespace

TEST(PixelRates, Zero) {
  const auto r = pixel_rates(small_array(0, 0));
  EXPECT_EQ(r.bit0, 0.0);
  EXPECT_EQ(r.bit1, 0.0);
}

TEST(PixelRates, ReferenceConstants) {
  const auto l = small_array(7, 8);
  EXPECT_NEAR(l.photon_energy(), 2.5305042766228391e-19, 1e-31);
  const auto r = pixel_rates(l);
  EXPECT_NEAR(r.bit1, 255630866.13839143, 1e-3);
  EXPECT_NEAR(r.bit0, 77800698.389945213, 1e-3);
}

TEST(PixelRates, InverselyProportionalToArraySize) {
  auto l = small_array(7, 8);
  const auto a = pixel_rates(l);
  l.array_size = 128;
  const auto b = pixel_rates(l);
  EXPECT_NEAR(b.bit0, 0.5 * a.bit0, 1e-6);
  EXPECT_NEAR(b.bit1, 0.5 * a.bit1, 1e-6);
}

TEST(PixelRates, RejectsBadLinks) {
  auto l = small_array(7, 8);
  l.wavelength = 0.0;
  EXPECT_THROW(pixel_rates(l), std::invalid_argument);
  l = small_array(7, 8);
  l.pde = 1.5;
  EXPECT_THROW(pixel_rates(l), std::invalid_argument);
  l = small_array(7, 8);
  l.array_size = 0;
  EXPECT_THROW(pixel_rates(l), std::invalid_argument);
}

TEST(PixelRates, FromPixelRatesRoundTrip) {
  const auto l = OpticalLink::from_pixel_rates({2e7, 7e7}, 64, GateTiming(50 * ns, 50 * ns, 10 * ns));
  const auto r = pixel_rates(l);
  EXPECT_NEAR(r.bit0, 2e7, 1e-4);
  EXPECT_NEAR(r.bit1, 7e7, 1e-4);
}

TEST(QFunction, Values) {
  EXPECT_DOUBLE_EQ(q_function(0.0), 0.5);
  EXPECT_NEAR(q_function(1.0), 0.15865525393145707, 1e-16);
  // Deep tail keeps relative accuracy.
  EXPECT_NEAR(q_function(9.0) / 1.1285884059538408e-19, 1.0, 1e-12);
}

TEST(BerGaussian, NoSignalIsCoinFlip) {
  EXPECT_DOUBLE_EQ(ber_gaussian(small_array(7, 0), 10 * ns), 0.5);
  EXPECT_DOUBLE_EQ(ber_gaussian(small_array(0, 0), 10 * ns), 0.5);
}

TEST(BerGaussian, ZeroSpreadWithSeparatedMeans) {
  // T_g < T_d with an overwhelming rate: bit-1 count is ~1 with no spread
  // only in the limit; emulate the degenerate branch with P_b = 0 and tiny P_R.
  const auto g = gaussian_ber(small_array(0, 0), 5 * ns);
  EXPECT_EQ(g.ber, 0.5);
}

TEST(BerGaussian, ReferencePoints) {
  const double b8 = ber_gaussian(small_array(7, 8), 10 * ns);
  EXPECT_GT(b8, 3.5e-5 / 2);
  EXPECT_LT(b8, 3.5e-5 * 2);
  const double b15 = ber_gaussian(small_array(7, 15), 7.8 * ns);
  EXPECT_GT(b15, 3.1e-9 / 3);
  EXPECT_LT(b15, 3.1e-9 * 3);
}

TEST(BerGaussian, DecreasesWithArraySizeAtFixedPixelRates) {
  auto l = small_array(7, 8);
  double prev = 1.0;
  for (std::uint32_t n : {16u, 64u, 256u, 1024u}) {
    // Scale powers so per-pixel rates stay fixed.
    l.array_size = n;
    l.background_power = 7 * nW * n / 64.0;
    l.received_power = 8 * nW * n / 64.0;
    const double b = ber_gaussian(l, 10 * ns);
    EXPECT_LT(b, prev);
    prev = b;
  }
}

TEST(GateGrid, IncludesSymbolPeriod) {
  const auto g = gate_grid(20 * ns, 0.02 * ns);
  ASSERT_EQ(g.size(), 1000u);
  EXPECT_EQ(g.back(), 20 * ns);
  EXPECT_NEAR(g.front(), 0.02 * ns, 1e-24);
  const auto odd = gate_grid(1 * ns, 0.3 * ns);
  ASSERT_EQ(odd.size(), 4u);
  EXPECT_EQ(odd.back(), 1 * ns);
}

TEST(OptimizeGate, NeverWorseThanFreeRunning) {
  for (double pr : {1.0, 4.0, 10.0}) {
    const auto l = small_array(3, pr);
    const auto opt = optimize_gate(l, {0.1 * ns, false});
    EXPECT_LE(opt.ber, ber_gaussian(l, 20 * ns));
  }
}

TEST(OptimizeGate, FreeRunningOptimalAtLowPower) {
  const auto opt = optimize_gate(small_array(0.5, 1));
  EXPECT_EQ(opt.gate_on, 20 * ns);
}

TEST(OptimizeGate, ReferenceAnchors) {
  EXPECT_NEAR(optimize_gate(small_array(0.5, 10)).gate_on / ns, 10.0, 0.3 + 1e-9);
  EXPECT_NEAR(optimize_gate(small_array(7, 8)).gate_on / ns, 10.0, 0.3);
  EXPECT_NEAR(optimize_gate(small_array(7, 15)).gate_on / ns, 7.8, 0.3);
  EXPECT_NEAR(optimize_gate(large_array(40, 40)).gate_on / ns, 2.7, 0.3);
  EXPECT_NEAR(optimize_gate(large_array(40, 70)).gate_on / ns, 2.0, 0.3);
}

TEST(OptimizeGate, TiesGoToLargerGate) {
  // No signal: every T_g gives exactly 0.5.
  const auto opt = optimize_gate(small_array(3, 0), {0.5 * ns, false});
  EXPECT_EQ(opt.gate_on, 20 * ns);
  EXPECT_EQ(opt.ber, 0.5);
}

TEST(OptimizeGate, GoldenRefinementDoesNotLose) {
  const auto l = small_array(7, 15);
  const auto grid = optimize_gate(l, {0.1 * ns, false});
  const auto refined = optimize_gate(l, {0.1 * ns, true});
  EXPECT_LE(refined.ber, grid.ber);
  EXPECT_NEAR(refined.gate_on, grid.gate_on, 0.1 * ns + 1e-15);
}

TEST(Sweep, EmptyValues) {
  EXPECT_TRUE(sweep(small_array(3, 4), SweepAxis::GateOn, {}).empty());
}

TEST(Sweep, RejectsUnsortedOrNonPositive) {
  const std::vector<double> unsorted{2 * ns, 1 * ns};
  EXPECT_THROW(sweep(small_array(3, 4), SweepAxis::GateOn, unsorted), std::invalid_argument);
  const std::vector<double> zero{0.0};
  EXPECT_THROW(sweep(small_array(3, 4), SweepAxis::GateOn, zero), std::invalid_argument);
}

TEST(Sweep, PreservesInputOrderAndOptimizesPerPoint) {
  const std::vector<double> pr{1 * nW, 4 * nW, 10 * nW};
  SweepOptions opts;
  opts.optimize_gate = true;
  opts.optimizer.grid_step = 0.1 * ns;
  const auto rows = sweep(small_array(3, 0), SweepAxis::ReceivedPower, pr, opts);
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].axis_value, pr[i]);
    auto l = small_array(3, 0);
    l.received_power = pr[i];
    EXPECT_EQ(rows[i].gate_on, optimize_gate(l, opts.optimizer).gate_on);
  }
}

TEST(Sweep, FreeRunningBerHasInteriorMinimumOverPower) {
  std::vector<double> pr;
  for (int k = 1; k <= 10; ++k) pr.push_back(k * nW);
  const auto rows = sweep(small_array(3, 0), SweepAxis::ReceivedPower, pr);
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].ber_analytic < rows[best].ber_analytic) best = i;
  }
  EXPECT_GT(best, 0u);
  EXPECT_LT(best, rows.size() - 1);
}
