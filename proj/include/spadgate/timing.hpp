#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace spadgate {

// All durations are seconds, all rates are events per second.

/// Incident photon rate seen by one pixel while its gate is ON.
class PhotonRate {
 public:
  constexpr PhotonRate() = default;
  explicit PhotonRate(double hz) : hz_(hz) {
    if (!(hz >= 0.0) || !std::isfinite(hz)) {
      throw std::invalid_argument("photon rate must be finite and >= 0, got " +
                                  std::to_string(hz));
    }
  }

  [[nodiscard]] constexpr double hz() const { return hz_; }

  friend constexpr bool operator==(PhotonRate, PhotonRate) = default;

 private:
  double hz_ = 0.0;
};

/// Symbol period, gate-ON time and paralyzable dead time of a gated pixel.
///
/// Each symbol period [k*T_s, (k+1)*T_s) opens its gate at its start and keeps
/// it open for T_g. T_g == T_s is a free-running (ungated) detector.
class GateTiming {
 public:
  GateTiming(double symbol_period, double gate_on, double dead_time)
      : symbol_period_(symbol_period), gate_on_(gate_on), dead_time_(dead_time) {
    if (!(symbol_period > 0.0) || !std::isfinite(symbol_period)) {
      throw std::invalid_argument("symbol period must be > 0");
    }
    if (!(dead_time > 0.0) || !std::isfinite(dead_time)) {
      throw std::invalid_argument("dead time must be > 0");
    }
    if (!(gate_on > 0.0) || gate_on > symbol_period) {
      throw std::invalid_argument("gate-ON time must satisfy 0 < T_g <= T_s, got T_g=" +
                                  std::to_string(gate_on) +
                                  " T_s=" + std::to_string(symbol_period));
    }
  }

  [[nodiscard]] double symbol_period() const { return symbol_period_; }
  [[nodiscard]] double gate_on() const { return gate_on_; }
  [[nodiscard]] double dead_time() const { return dead_time_; }
  [[nodiscard]] double gate_off() const { return symbol_period_ - gate_on_; }
  [[nodiscard]] bool free_running() const { return gate_on_ == symbol_period_; }

  [[nodiscard]] GateTiming with_gate_on(double gate_on) const {
    return {symbol_period_, gate_on, dead_time_};
  }
  [[nodiscard]] GateTiming with_dead_time(double dead_time) const {
    return {symbol_period_, gate_on_, dead_time};
  }

  friend bool operator==(const GateTiming&, const GateTiming&) = default;

 private:
  double symbol_period_;
  double gate_on_;
  double dead_time_;
};

inline constexpr double kNanosecond = 1e-9;
inline constexpr double kNanowatt = 1e-9;

}  // namespace spadgate
