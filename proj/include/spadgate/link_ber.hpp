#pragma once

// Gaussian-approximation BER of an OOK link received by an N-pixel gated SPAD
// array, and the exhaustive search for the best gate-ON time.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "spadgate/parallel.hpp"
#include "spadgate/photon_stats.hpp"
#include "spadgate/timing.hpp"

namespace spadgate {

// CODATA 2018 exact values.
inline constexpr double kPlanck = 6.62607015e-34;        // J s
inline constexpr double kSpeedOfLight = 299792458.0;     // m / s

struct RatePair {
  double bit0 = 0.0;  // Hz
  double bit1 = 0.0;  // Hz
};

/// Physical link seen by the receiver. received_power is the average OOK
/// power, so a '1' symbol carries 2 * received_power.
struct OpticalLink {
  double wavelength = 785e-9;     // m
  double pde = 0.18;
  double received_power = 0.0;    // W
  double background_power = 0.0;  // W
  std::uint32_t array_size = 1;
  GateTiming timing{20e-9, 20e-9, 10e-9};

  void validate() const {
    if (!(wavelength > 0.0) || !std::isfinite(wavelength)) {
      throw std::invalid_argument("wavelength must be > 0");
    }
    if (!(pde > 0.0 && pde <= 1.0)) throw std::invalid_argument("pde must lie in (0, 1]");
    if (!(received_power >= 0.0)) throw std::invalid_argument("received power must be >= 0");
    if (!(background_power >= 0.0)) {
      throw std::invalid_argument("background power must be >= 0");
    }
    if (array_size < 1) throw std::invalid_argument("array size must be >= 1");
  }

  [[nodiscard]] double photon_energy() const {
    return kPlanck * kSpeedOfLight / wavelength;
  }

  [[nodiscard]] OpticalLink with_gate_on(double gate_on) const {
    OpticalLink out = *this;
    out.timing = timing.with_gate_on(gate_on);
    return out;
  }

  /// Link whose per-pixel rates equal `rates` (inverse of pixel_rates).
  static OpticalLink from_pixel_rates(RatePair rates, std::uint32_t array_size,
                                      const GateTiming& timing, double wavelength = 785e-9,
                                      double pde = 0.18) {
    if (!(rates.bit0 >= 0.0) || !(rates.bit1 >= rates.bit0)) {
      throw std::invalid_argument("rates must satisfy 0 <= bit0 <= bit1");
    }
    OpticalLink link;
    link.wavelength = wavelength;
    link.pde = pde;
    link.array_size = array_size;
    link.timing = timing;
    const double per_rate = array_size * link.photon_energy() / pde;
    link.background_power = rates.bit0 * per_rate;
    link.received_power = 0.5 * (rates.bit1 - rates.bit0) * per_rate;
    return link;
  }
};

inline RatePair pixel_rates(const OpticalLink& link) {
  link.validate();
  const double scale = link.pde / (link.array_size * link.photon_energy());
  return {scale * link.background_power,
          scale * (2.0 * link.received_power + link.background_power)};
}

/// Standard normal tail probability, Q(x) = erfc(x / sqrt 2) / 2.
inline double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

/// Per-pixel moments for both symbols and the resulting Gaussian BER.
struct GaussianBer {
  double gate_on = 0.0;
  CountStats bit0;
  CountStats bit1;
  double ber = 0.5;

  /// Array-count threshold sigma-weighted between the two means.
  [[nodiscard]] double threshold(std::uint32_t array_size) const {
    const double s0 = std::sqrt(bit0.variance);
    const double s1 = std::sqrt(bit1.variance);
    const double n = array_size;
    if (s0 + s1 == 0.0) return 0.5 * n * (bit0.mean + bit1.mean);
    return (s0 * n * bit1.mean + s1 * n * bit0.mean) / (s0 + s1);
  }
};

inline GaussianBer gaussian_ber(const OpticalLink& link, double gate_on,
                                const QuadratureOptions& opts = {}) {
  const auto rates = pixel_rates(link);
  const GateTiming timing = link.timing.with_gate_on(gate_on);
  GaussianBer out;
  out.gate_on = gate_on;
  out.bit0 = count_stats(PhotonRate(rates.bit0), timing, opts);
  out.bit1 = count_stats(PhotonRate(rates.bit1), timing, opts);
  const double gap = out.bit1.mean - out.bit0.mean;
  const double spread = std::sqrt(out.bit0.variance) + std::sqrt(out.bit1.variance);
  // Degenerate spread: a zero gap is a coin flip, any positive gap is error-free.
  if (spread == 0.0) {
    out.ber = gap > 0.0 ? 0.0 : 0.5;
  } else {
    out.ber = q_function(std::sqrt(static_cast<double>(link.array_size)) * gap / spread);
  }
  return out;
}

inline double ber_gaussian(const OpticalLink& link, double gate_on,
                           const QuadratureOptions& opts = {}) {
  return gaussian_ber(link, gate_on, opts).ber;
}

struct GateOptimum {
  double gate_on = 0.0;
  double ber = 0.5;
};

struct OptimizeOptions {
  double grid_step = 0.02e-9;
  bool golden_refine = false;
};

/// Candidate gate-ON times {step, 2 step, ...} capped by T_s, with T_s always
/// last.
inline std::vector<double> gate_grid(double symbol_period, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("grid step must be > 0");
  std::vector<double> grid;
  const auto count = static_cast<std::int64_t>(std::floor(symbol_period / step * (1.0 + 1e-12)));
  grid.reserve(static_cast<std::size_t>(count) + 1);
  for (std::int64_t k = 1; k <= count; ++k) {
    const double tg = static_cast<double>(k) * step;
    if (tg >= symbol_period * (1.0 - 1e-12)) break;
    grid.push_back(tg);
  }
  grid.push_back(symbol_period);
  return grid;
}

/// Exhaustive grid search over the gate-ON time. Ties go to the larger T_g.
inline GateOptimum optimize_gate(const OpticalLink& link, const OptimizeOptions& opts = {}) {
  const double ts = link.timing.symbol_period();
  const auto grid = gate_grid(ts, opts.grid_step);
  std::vector<double> bers(grid.size());
  parallel_for(grid.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) bers[i] = ber_gaussian(link, grid[i]);
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (bers[i] <= bers[best]) best = i;
  }
  GateOptimum out{grid[best], bers[best]};

  if (opts.golden_refine) {
    // Golden-section search inside one grid step on either side.
    const double lo_bound = best > 0 ? grid[best - 1] : std::max(grid[best] - opts.grid_step, 0.0);
    const double hi_bound = best + 1 < grid.size() ? grid[best + 1] : ts;
    double lo = lo_bound;
    double hi = hi_bound;
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    const auto eval = [&](double tg) {
      return tg > 0.0 ? ber_gaussian(link, tg) : std::numeric_limits<double>::infinity();
    };
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = eval(x1);
    double f2 = eval(x2);
    for (int iter = 0; iter < 40 && hi - lo > 1e-15; ++iter) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - inv_phi * (hi - lo);
        f1 = eval(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + inv_phi * (hi - lo);
        f2 = eval(x2);
      }
    }
    const double xm = 0.5 * (lo + hi);
    const double fm = eval(xm);
    if (fm < out.ber) out = {xm, fm};
  }
  return out;
}

enum class SweepAxis { GateOn, ReceivedPower };

/// One row of a sweep. axis_value is T_g (s) or P_R (W) depending on the axis.
struct BerPoint {
  double axis_value = 0.0;
  double gate_on = 0.0;
  double ber_analytic = 0.5;
  CountStats bit0;
  CountStats bit1;
  std::optional<double> ber_mc;
  std::optional<double> mc_halfwidth;
};

struct SweepOptions {
  bool optimize_gate = false;  // only meaningful for the received-power axis
  OptimizeOptions optimizer;
};

/// Evaluates the analytic BER at every value. Output order follows input order.
inline std::vector<BerPoint> sweep(const OpticalLink& base, SweepAxis axis,
                                   std::span<const double> values,
                                   const SweepOptions& opts = {}) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0)) throw std::invalid_argument("sweep values must be positive");
    if (i > 0 && values[i] < values[i - 1]) {
      throw std::invalid_argument("sweep values must be sorted");
    }
  }
  std::vector<BerPoint> out(values.size());
  const auto evaluate = [&](std::size_t i) {
    BerPoint p;
    p.axis_value = values[i];
    OpticalLink link = base;
    double tg = base.timing.gate_on();
    if (axis == SweepAxis::GateOn) {
      tg = values[i];
    } else {
      link.received_power = values[i];
      if (opts.optimize_gate) tg = optimize_gate(link, opts.optimizer).gate_on;
    }
    const auto g = gaussian_ber(link, tg);
    p.gate_on = tg;
    p.ber_analytic = g.ber;
    p.bit0 = g.bit0;
    p.bit1 = g.bit1;
    return p;
  };
  // The optimizer already fans out over the T_g grid.
  if (axis == SweepAxis::ReceivedPower && opts.optimize_gate) {
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = evaluate(i);
  } else {
    parallel_for(values.size(), [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) out[i] = evaluate(i);
    });
  }
  return out;
}

}  // namespace spadgate
