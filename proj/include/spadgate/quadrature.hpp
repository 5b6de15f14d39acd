#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spadgate/timing.hpp"

namespace spadgate {

/// Thrown when adaptive bisection hits its depth limit before meeting the
/// requested tolerance.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(double achieved, double requested)
      : std::runtime_error("quadrature did not converge: achieved error " +
                           std::to_string(achieved) + ", requested " +
                           std::to_string(requested)),
        achieved_(achieved),
        requested_(requested) {}

  [[nodiscard]] double achieved_error() const { return achieved_; }
  [[nodiscard]] double requested_error() const { return requested_; }

 private:
  double achieved_;
  double requested_;
};

struct QuadratureOptions {
  double rel_tol = 1e-12;
  int max_depth = 30;
};

/// Strictly increasing integration breakpoints, endpoints included.
using Breakpoints = std::vector<double>;

namespace detail {

inline constexpr int kGaussOrder = 15;

struct GaussRule {
  std::array<double, kGaussOrder> nodes{};
  std::array<double, kGaussOrder> weights{};
};

// Legendre roots by Newton iteration from the Chebyshev initial guess.
inline GaussRule make_gauss_legendre() {
  GaussRule rule;
  constexpr int n = kGaussOrder;
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-17) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

inline const GaussRule& gauss_legendre_15() {
  static const GaussRule rule = make_gauss_legendre();
  return rule;
}

template <class F>
double gauss_15(const F& f, double a, double b) {
  const auto& rule = gauss_legendre_15();
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (int i = 0; i < kGaussOrder; ++i) {
    sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  }
  return sum * half;
}

template <class F>
double adaptive_piece(const F& f, double a, double b, double whole, double tol,
                      int depth, const QuadratureOptions& opts) {
  const double mid = 0.5 * (a + b);
  const double left = gauss_15(f, a, mid);
  const double right = gauss_15(f, mid, b);
  const double refined = left + right;
  const double err = std::abs(refined - whole);
  const double noise = 16.0 * std::numeric_limits<double>::epsilon() *
                       (std::abs(left) + std::abs(right));
  if (err <= std::max(tol, noise)) return refined;
  if (depth >= opts.max_depth) throw QuadratureError(err, tol);
  return adaptive_piece(f, a, mid, left, 0.5 * tol, depth + 1, opts) +
         adaptive_piece(f, mid, b, right, 0.5 * tol, depth + 1, opts);
}

}  // namespace detail

/// Sum of adaptive 15-point Gauss-Legendre estimates over each piece
/// [bps[i], bps[i+1]]. The integrand only needs to be smooth inside pieces.
template <class F>
double integrate_piecewise(const F& f, std::span<const double> bps,
                           const QuadratureOptions& opts = {}) {
  if (bps.size() < 2) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < bps.size(); ++i) {
    const double a = bps[i];
    const double b = bps[i + 1];
    if (!(b > a)) {
      throw std::invalid_argument("breakpoints must be strictly increasing");
    }
    const double whole = detail::gauss_15(f, a, b);
    total += detail::adaptive_piece(f, a, b, whole, opts.rel_tol * std::abs(whole), 0,
                                    opts);
  }
  return total;
}

/// Points in [a, b] where the gate-overlap function G(s) has a kink: where
/// T_d - s crosses a multiple of T_s and where the positive-part clamp
/// switches. A free-running timing makes G affine, so only {a, b} remain.
inline Breakpoints breakpoints_of_gate_overlap(const GateTiming& timing, double a,
                                               double b) {
  const double ts = timing.symbol_period();
  const double tg = timing.gate_on();
  const double td = timing.dead_time();
  if (!(a >= 0.0) || !(b <= td) || !(a <= b)) {
    throw std::invalid_argument("breakpoint interval must lie inside [0, T_d]");
  }
  Breakpoints pts{a, b};
  if (!timing.free_running()) {
    for (long k = 0;; ++k) {
      const double floor_kink = td - static_cast<double>(k) * ts;
      const double clamp_kink = td - static_cast<double>(k + 1) * ts + tg;
      if (floor_kink < a && clamp_kink < a) break;
      if (floor_kink > a && floor_kink < b) pts.push_back(floor_kink);
      if (clamp_kink > a && clamp_kink < b) pts.push_back(clamp_kink);
    }
  }
  std::sort(pts.begin(), pts.end());
  // Merge points closer than 1 fs; they come from roundoff, not geometry.
  constexpr double kMergeGap = 1e-15;
  Breakpoints out;
  for (double p : pts) {
    if (out.empty() || p - out.back() > kMergeGap) {
      out.push_back(p);
    } else if (p == b) {
      out.back() = b;
    }
  }
  if (out.size() == 1 && a < b) return {a, b};
  return out;
}

}  // namespace spadgate
