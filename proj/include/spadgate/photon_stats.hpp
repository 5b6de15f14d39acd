#pragma once

// Detected-count statistics of one passively quenched (paralyzable), time-gated
// SPAD pixel under a constant incident photon rate.
//
// Time inside the current symbol runs from 0 (gate opens) to T_s; the gate is
// ON on [0, T_g). The gate-ON time of earlier frames that falls inside the
// dead-time look-back window (s - T_d, 0) is G(s), see gate_overlap().
//
// The gate-ON interval is cut into floor(T_g/T_d) segments of length T_d plus
// a remainder; at most one photon is detected per segment. The correlation
// terms below are E[K_n K_j] between two such segments, the later one of
// length t:
//   corr_adjacent            neither is the first segment, adjacent
//   corr_nonadjacent         neither is the first segment, not adjacent
//   corr_first_adjacent      first segment and its neighbour
//   corr_first_nonadjacent   first segment and a non-adjacent one

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "spadgate/quadrature.hpp"
#include "spadgate/timing.hpp"

namespace spadgate {

struct CountStats {
  double mean = 0.0;
  double second_moment = 0.0;
  double variance = 0.0;
};

/// Raised when second_moment - mean^2 is more negative than the clamp window.
class VarianceError : public std::runtime_error {
 public:
  explicit VarianceError(double value)
      : std::runtime_error("negative variance " + std::to_string(value) +
                           " exceeds quadrature tolerance"),
        value_(value) {}
  [[nodiscard]] double value() const { return value_; }

 private:
  double value_;
};

inline constexpr double kVarianceClampWindow = 1e-9;

/// Detected rate of a free-running paralyzable detector: lambda * exp(-lambda T_d).
inline PhotonRate transfer_rate(PhotonRate rate, double dead_time) {
  if (!(dead_time > 0.0)) throw std::invalid_argument("dead time must be > 0");
  const double l = rate.hz();
  return PhotonRate(l * std::exp(-l * dead_time));
}

namespace detail {

inline bool to_picoseconds(double seconds, std::int64_t& out) {
  const double ps = seconds * 1e12;
  if (!(std::abs(ps) < 9e15)) return false;
  const double rounded = std::round(ps);
  if (std::abs(ps - rounded) > 1e-6) return false;
  out = static_cast<std::int64_t>(rounded);
  return true;
}

}  // namespace detail

/// Total gate-ON time of earlier frames inside the look-back window (s - T_d, 0).
///
/// When every duration is a whole number of picoseconds the floor and clamp are
/// evaluated in integer picoseconds. Otherwise doubles are used and values
/// within 1 fs of a floor or clamp breakpoint are snapped onto it.
inline double gate_overlap(double s, const GateTiming& timing) {
  const double ts = timing.symbol_period();
  const double tg = timing.gate_on();
  const double td = timing.dead_time();
  if (!(s >= 0.0 && s <= td)) {
    throw std::invalid_argument("gate_overlap: s must lie in [0, T_d]");
  }

  std::int64_t ts_ps = 0;
  std::int64_t tg_ps = 0;
  std::int64_t td_ps = 0;
  std::int64_t s_ps = 0;
  if (detail::to_picoseconds(ts, ts_ps) && detail::to_picoseconds(tg, tg_ps) &&
      detail::to_picoseconds(td, td_ps) && detail::to_picoseconds(s, s_ps)) {
    const std::int64_t window = td_ps - s_ps;
    const std::int64_t frames = window / ts_ps;
    const std::int64_t partial = window - frames * ts_ps - ts_ps + tg_ps;
    return static_cast<double>(frames * tg_ps + std::max<std::int64_t>(partial, 0)) * 1e-12;
  }

  constexpr double kSnap = 1e-15;
  const double window = td - s;
  double frames = std::floor(window / ts);
  const double nearest = std::round(window / ts);
  if (std::abs(window - nearest * ts) <= kSnap) frames = nearest;
  double partial = window - frames * ts - ts + tg;
  if (std::abs(partial) <= kSnap) partial = 0.0;
  return frames * tg + std::max(partial, 0.0);
}

namespace detail {

// exp(-lambda [G(s) + s]): probability that nothing arrived during gate-ON
// time in (s - T_d, s) given the gate opened at 0.
inline auto quiet_history(double lambda, const GateTiming& timing) {
  return [lambda, &timing](double s) {
    return std::exp(-lambda * (gate_overlap(s, timing) + s));
  };
}

inline void check_segment_length(double t, double dead_time) {
  if (!(t >= 0.0 && t <= dead_time)) {
    throw std::invalid_argument("segment length must lie in [0, T_d]");
  }
}

}  // namespace detail

/// Probability that the first T_d-long segment of the gate registers a photon:
/// integral over [0, T_d] of lambda exp(-lambda [G(s) + s]).
inline double first_segment_detection_probability(PhotonRate rate, const GateTiming& timing,
                                                  const QuadratureOptions& opts = {}) {
  const double l = rate.hz();
  if (l == 0.0) return 0.0;
  const double td = timing.dead_time();
  const auto quiet = detail::quiet_history(l, timing);
  const auto bps = breakpoints_of_gate_overlap(timing, 0.0, td);
  return l * integrate_piecewise(quiet, bps, opts);
}

/// Mean detected count per symbol period.
inline double mean_count(PhotonRate rate, const GateTiming& timing,
                         const QuadratureOptions& opts = {}) {
  const double l = rate.hz();
  if (l == 0.0) return 0.0;
  const double tg = timing.gate_on();
  const double td = timing.dead_time();
  const double head_end = std::min(tg, td);
  const auto quiet = detail::quiet_history(l, timing);
  const auto bps = breakpoints_of_gate_overlap(timing, 0.0, head_end);
  const double head = l * integrate_piecewise(quiet, bps, opts);
  const double tail = std::max(tg - td, 0.0) * l * std::exp(-l * td);
  return head + tail;
}

inline double corr_adjacent(double t, PhotonRate rate, double dead_time) {
  detail::check_segment_length(t, dead_time);
  const double l = rate.hz();
  return 0.5 * l * l * t * t * std::exp(-2.0 * l * dead_time);
}

inline double corr_nonadjacent(double t, PhotonRate rate, double dead_time) {
  detail::check_segment_length(t, dead_time);
  const double l = rate.hz();
  return l * l * dead_time * t * std::exp(-2.0 * l * dead_time);
}

inline double corr_first_adjacent(double t, PhotonRate rate, const GateTiming& timing,
                                  const QuadratureOptions& opts = {}) {
  const double td = timing.dead_time();
  detail::check_segment_length(t, td);
  const double l = rate.hz();
  if (l == 0.0 || t == 0.0) return 0.0;
  const auto quiet = detail::quiet_history(l, timing);
  const auto weighted = [&](double s) { return quiet(s) * (t - s); };
  const auto bps = breakpoints_of_gate_overlap(timing, 0.0, t);
  return l * l * std::exp(-l * td) * integrate_piecewise(weighted, bps, opts);
}

inline double corr_first_nonadjacent(double t, PhotonRate rate, const GateTiming& timing,
                                     const QuadratureOptions& opts = {}) {
  const double td = timing.dead_time();
  detail::check_segment_length(t, td);
  const double l = rate.hz();
  if (l == 0.0 || t == 0.0) return 0.0;
  return l * t * std::exp(-l * td) * first_segment_detection_probability(rate, timing, opts);
}

/// E[K^2] of the detected count per symbol period.
///
/// Branches: T_g < T_d (K is 0 or 1), T_d <= T_g < 2 T_d, T_g >= 2 T_d.
inline double second_moment(PhotonRate rate, const GateTiming& timing,
                            const QuadratureOptions& opts = {}) {
  const double l = rate.hz();
  const double tg = timing.gate_on();
  const double td = timing.dead_time();
  const double mean = mean_count(rate, timing, opts);
  if (l == 0.0 || tg < td) return mean;

  const double pair_span = tg - td;
  const double upper = std::min(pair_span, td);
  const auto quiet = detail::quiet_history(l, timing);
  const auto weighted = [&](double s) { return quiet(s) * (pair_span - s); };
  const auto bps = breakpoints_of_gate_overlap(timing, 0.0, upper);
  const double cross = 2.0 * l * l * std::exp(-l * td) * integrate_piecewise(weighted, bps, opts);
  if (tg < 2.0 * td) return mean + cross;

  const double steady = tg - 2.0 * td;
  return mean + l * l * std::exp(-2.0 * l * td) * steady * steady + cross;
}

/// second_moment - mean^2, with roundoff in [-1e-9, 0) clamped to zero.
inline double variance_from(double mean, double second) {
  const double v = second - mean * mean;
  if (v >= 0.0) return v;
  if (v >= -kVarianceClampWindow) return 0.0;
  throw VarianceError(v);
}

inline CountStats count_stats(PhotonRate rate, const GateTiming& timing,
                              const QuadratureOptions& opts = {}) {
  CountStats out;
  out.mean = mean_count(rate, timing, opts);
  out.second_moment = second_moment(rate, timing, opts);
  out.variance = variance_from(out.mean, out.second_moment);
  return out;
}

inline double variance(PhotonRate rate, const GateTiming& timing,
                       const QuadratureOptions& opts = {}) {
  return count_stats(rate, timing, opts).variance;
}

// Free-running (T_g = T_s) closed forms.

inline double free_running_mean(PhotonRate rate, double gate_on, double dead_time) {
  const double l = rate.hz();
  return l * gate_on * std::exp(-l * dead_time);
}

inline double free_running_second_moment(PhotonRate rate, double gate_on, double dead_time) {
  const double l = rate.hz();
  const double mean = free_running_mean(rate, gate_on, dead_time);
  if (gate_on < dead_time) return mean;
  const double span = gate_on - dead_time;
  return mean + l * l * std::exp(-2.0 * l * dead_time) * span * span;
}

}  // namespace spadgate
