// Monte-Carlo cross-checks of the analytic count moments.
#include <gtest/gtest.h>

#include <cmath>

#include "spadgate/mc_sim.hpp"

using namespace spadgate;

namespace {
constexpr double ns = 1e-9;

// Fraction of symbols with a detection in [a0, a0 + len) and one in [b0, b0 + len),
// with its binomial standard error.
struct Joint {
  double p;
  double se;
};

Joint joint_detection(double rate, const GateTiming& t, double a0, double b0, double len,
                      std::uint64_t n, std::uint64_t seed) {
  std::uint64_t hits = 0;
  simulate_constant_rate(PhotonRate(rate), t, n, seed, 10, [&](std::span<const double> det) {
    bool a = false;
    bool b = false;
    for (double d : det) {
      a = a || (d >= a0 && d < a0 + len);
      b = b || (d >= b0 && d < b0 + len);
    }
    if (a && b) ++hits;
  });
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  return {p, std::sqrt(p * (1 - p) / static_cast<double>(n))};
}
}  // namespace

TEST(PairCorrelationMc, FirstAdjacent) {
  const GateTiming t(25 * ns, 18 * ns, 10 * ns);
  const double rate = 5e8;
  const auto j = joint_detection(rate, t, 0.0, 10 * ns, 8 * ns, 10'000'000, 17);
  const double expected = corr_first_adjacent(8 * ns, PhotonRate(rate), t);
  EXPECT_NEAR(j.p, expected, 3 * j.se) << "se=" << j.se;
}

TEST(PairCorrelationMc, FirstNonadjacent) {
  const GateTiming t(30 * ns, 28 * ns, 10 * ns);
  const double rate = 5e8;
  // First segment is the full [0, T_d); the partner is [2 T_d, 2 T_d + t).
  std::uint64_t hits = 0;
  const std::uint64_t n = 10'000'000;
  simulate_constant_rate(PhotonRate(rate), t, n, 23, 10, [&](std::span<const double> det) {
    bool a = false;
    bool b = false;
    for (double d : det) {
      a = a || d < 10 * ns;
      b = b || (d >= 20 * ns && d < 28 * ns);
    }
    if (a && b) ++hits;
  });
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  const double se = std::sqrt(p * (1 - p) / static_cast<double>(n));
  EXPECT_NEAR(p, corr_first_nonadjacent(8 * ns, PhotonRate(rate), t), 3 * se) << "se=" << se;
}

TEST(PairCorrelationMc, SteadyAdjacent) {
  // Segments [T_d, T_d + t) and [2 T_d, 2 T_d + t) are both past the first one.
  const GateTiming t(40 * ns, 40 * ns, 10 * ns);
  const double rate = 1e8;
  const auto j = joint_detection(rate, t, 10 * ns, 20 * ns, 6 * ns, 2'000'000, 29);
  EXPECT_NEAR(j.p, corr_adjacent(6 * ns, PhotonRate(rate), 10 * ns), 4 * j.se);
}

TEST(MomentsMc, SecondMomentMatches) {
  const GateTiming t(20 * ns, 16 * ns, 10 * ns);
  const PhotonRate rate(5e8);
  const auto m = estimate_moments_mc(rate, t, 10'000'000, 31);
  const auto a = count_stats(rate, t);
  EXPECT_NEAR(m.stats.mean, a.mean, 3 * m.mean_se);
  EXPECT_NEAR(m.stats.variance, a.variance, 3 * m.variance_se);
}

TEST(MomentsMc, LowRateNearPoisson) {
  // lambda T_d = 0.1: dead time only trims the Fano factor by O(lambda T_d).
  const PhotonRate rate(1e7);
  for (double tg = 1; tg <= 20; tg += 1) {
    const GateTiming t(20 * ns, tg * ns, 10 * ns);
    const auto a = count_stats(rate, t);
    EXPECT_LE(a.variance, a.mean);
    EXPECT_GE(a.variance / a.mean, 0.85) << "Tg " << tg;
    const auto m = estimate_moments_mc(rate, t, 400'000, 37 + static_cast<std::uint64_t>(tg));
    EXPECT_NEAR(m.stats.variance / a.variance, 1.0, 0.05) << "Tg " << tg;
  }
}

TEST(MomentsMc, GridWithinFourSigma) {
  const double rates[] = {3e7, 2e8, 8e8};
  const double gates[] = {3, 9.5, 10, 14, 20};
  const double periods[] = {20, 25};
  std::uint64_t seed = 100;
  for (double ts : periods) {
    for (double tg : gates) {
      for (double l : rates) {
        const GateTiming t(ts * ns, tg * ns, 10 * ns);
        const auto a = count_stats(PhotonRate(l), t);
        const auto m = estimate_moments_mc(PhotonRate(l), t, 300'000, ++seed);
        EXPECT_LE(std::abs(m.stats.mean - a.mean), 4 * m.mean_se + 1e-12)
            << "rate " << l << " Ts " << ts << " Tg " << tg;
        EXPECT_LE(std::abs(m.stats.variance - a.variance), 4 * m.variance_se + 1e-12)
            << "rate " << l << " Ts " << ts << " Tg " << tg;
      }
    }
  }
}
