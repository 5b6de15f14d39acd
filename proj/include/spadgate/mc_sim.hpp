#pragma once

// Event-level Monte Carlo of a gated, passively quenched SPAD array.
//
// Detection rule: an incident photon at time t is detected iff it falls inside
// a gate-ON window and no other incident photon fell inside gate-ON time
// during (t - T_d, t). Every gate-ON arrival, detected or not, restarts the
// dead time. Photons arriving while the gate is OFF never trigger an
// avalanche and leave the detector state untouched.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "spadgate/link_ber.hpp"
#include "spadgate/parallel.hpp"
#include "spadgate/photon_stats.hpp"
#include "spadgate/rng.hpp"
#include "spadgate/timing.hpp"

namespace spadgate {

struct DetectionRecord {
  std::vector<double> incident_times;
  std::vector<double> detected_times;
};

using SymbolCounts = std::vector<std::uint32_t>;

inline constexpr unsigned kDefaultWarmupSymbols = 10;

/// Homogeneous Poisson arrivals on [0, duration) from cumulative exponential gaps.
inline std::vector<double> gen_arrivals(RandomStream& rng, PhotonRate rate, double duration) {
  std::vector<double> out;
  const double l = rate.hz();
  if (l == 0.0 || !(duration > 0.0)) return out;
  out.reserve(static_cast<std::size_t>(l * duration * 1.1) + 16);
  for (double t = rng.exponential() / l; t < duration; t += rng.exponential() / l) {
    out.push_back(t);
  }
  return out;
}

inline std::vector<double> gen_arrivals(PhotonRate rate, double duration, std::uint64_t seed) {
  RandomStream rng(seed, streams::kTrace);
  return gen_arrivals(rng, rate, duration);
}

/// Offset of t inside its symbol frame, in [0, T_s).
inline double phase_in_symbol(double t, double symbol_period) {
  const double phase = t - std::floor(t / symbol_period) * symbol_period;
  return phase < symbol_period ? phase : 0.0;
}

/// Filters sorted incident times through gating and paralyzable dead time.
/// The detector starts idle at t = -infinity.
inline DetectionRecord apply_gated_dead_time(std::span<const double> incident,
                                             const GateTiming& timing) {
  if (!std::is_sorted(incident.begin(), incident.end())) {
    throw std::invalid_argument("incident times must be sorted");
  }
  DetectionRecord rec;
  rec.incident_times.assign(incident.begin(), incident.end());
  double last_active = -std::numeric_limits<double>::infinity();
  for (double t : incident) {
    if (phase_in_symbol(t, timing.symbol_period()) >= timing.gate_on()) continue;
    if (t - last_active >= timing.dead_time()) rec.detected_times.push_back(t);
    last_active = t;
  }
  return rec;
}

/// Detected counts per symbol of a record that starts at t = 0.
inline SymbolCounts counts_per_symbol(const DetectionRecord& rec, double symbol_period,
                                      std::size_t n_symbols) {
  SymbolCounts counts(n_symbols, 0);
  for (double t : rec.detected_times) {
    const auto k = static_cast<std::size_t>(std::floor(t / symbol_period));
    if (k < n_symbols) ++counts[k];
  }
  return counts;
}

/// Dead-time state of one pixel: time of the last gate-ON arrival, measured
/// from the start of the symbol about to be simulated.
struct PixelState {
  double last_active = -std::numeric_limits<double>::infinity();
};

/// Simulates one symbol of one pixel; only gate-ON arrivals are drawn, which
/// is exact because gate-OFF arrivals have no effect. If `detections` is set,
/// detected offsets within the symbol are appended to it.
inline std::uint32_t simulate_symbol(PixelState& state, RandomStream& rng, double rate,
                                     const GateTiming& timing,
                                     std::vector<double>* detections = nullptr) {
  std::uint32_t count = 0;
  if (rate > 0.0) {
    const double tg = timing.gate_on();
    const double td = timing.dead_time();
    for (double t = rng.exponential() / rate; t < tg; t += rng.exponential() / rate) {
      if (t - state.last_active >= td) {
        ++count;
        if (detections) detections->push_back(t);
      }
      state.last_active = t;
    }
  }
  state.last_active -= timing.symbol_period();
  return count;
}

/// Streaming N-pixel array simulator; dead-time state carries across calls.
class FrameSimulator {
 public:
  FrameSimulator(const OpticalLink& link, double gate_on, std::uint64_t seed,
                 unsigned warmup = kDefaultWarmupSymbols)
      : timing_(link.timing.with_gate_on(gate_on)),
        rates_(pixel_rates(link)),
        pixels_(link.array_size) {
    engines_.reserve(link.array_size);
    for (std::uint32_t p = 0; p < link.array_size; ++p) engines_.emplace_back(seed, p);
    const auto min_warmup = static_cast<unsigned>(
        std::ceil(timing_.dead_time() / timing_.symbol_period())) + 1;
    const unsigned n_warm = std::max(warmup, min_warmup);
    RandomStream warm_bits(seed, streams::kWarmupBits);
    std::vector<std::uint8_t> bits(n_warm);
    for (auto& b : bits) b = warm_bits.bit() ? 1 : 0;
    run(bits);
  }

  [[nodiscard]] const GateTiming& timing() const { return timing_; }
  [[nodiscard]] RatePair rates() const { return rates_; }

  /// Array counts (sum over pixels) for each symbol in `bits`.
  SymbolCounts run(std::span<const std::uint8_t> bits) {
    const std::size_t n_pix = pixels_.size();
    const std::size_t slices = std::min<std::size_t>(worker_count(), n_pix);
    std::vector<SymbolCounts> partial(slices, SymbolCounts(bits.size(), 0));
    parallel_for(
        slices,
        [&](std::size_t s_begin, std::size_t s_end) {
          for (std::size_t s = s_begin; s < s_end; ++s) {
            const std::size_t p_begin = n_pix * s / slices;
            const std::size_t p_end = n_pix * (s + 1) / slices;
            auto& acc = partial[s];
            for (std::size_t p = p_begin; p < p_end; ++p) {
              for (std::size_t k = 0; k < bits.size(); ++k) {
                const double rate = bits[k] ? rates_.bit1 : rates_.bit0;
                acc[k] += simulate_symbol(pixels_[p], engines_[p], rate, timing_);
              }
            }
          }
        },
        static_cast<unsigned>(slices));
    SymbolCounts total = std::move(partial[0]);
    for (std::size_t s = 1; s < slices; ++s) {
      for (std::size_t k = 0; k < total.size(); ++k) total[k] += partial[s][k];
    }
    return total;
  }

 private:
  GateTiming timing_;
  RatePair rates_;
  std::vector<PixelState> pixels_;
  std::vector<RandomStream> engines_;
};

/// Array counts for `bits` after `warmup` discarded random symbols.
inline SymbolCounts simulate_frame(const OpticalLink& link, double gate_on,
                                   std::span<const std::uint8_t> bits, unsigned warmup,
                                   std::uint64_t seed) {
  FrameSimulator sim(link, gate_on, seed, warmup);
  return sim.run(bits);
}

inline std::vector<std::uint8_t> random_bits(RandomStream& rng, std::size_t n) {
  std::vector<std::uint8_t> bits(n);
  for (auto& b : bits) b = rng.bit() ? 1 : 0;
  return bits;
}

// ---------------------------------------------------------------------------
// BER

/// Two-sided 95% Wilson score interval half-width for `errors` out of `trials`.
inline double wilson_halfwidth(std::uint64_t errors, std::uint64_t trials) {
  if (trials == 0) return 0.5;
  constexpr double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(errors) / n;
  const double denom = 1.0 + z * z / n;
  return z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
}

struct BerMcOptions {
  std::uint64_t min_bits = 10'000;
  std::uint64_t max_bits = 1'000'000'000;
  std::uint64_t target_errors = 100;
  std::size_t chunk_bits = 1 << 16;
  unsigned warmup = kDefaultWarmupSymbols;
  std::optional<double> fixed_threshold;  // array count; decide '1' iff count >= threshold
};

struct BerEstimate {
  double ber = 0.0;
  double halfwidth = 0.5;
  std::uint64_t errors = 0;
  std::uint64_t bits = 0;
  double threshold = 0.0;
  bool upper_bounded = false;  // stopped at max_bits before target_errors
};

/// Error fraction of threshold decoding on simulated array counts. Runs at
/// least min_bits and keeps going until target_errors or max_bits.
inline BerEstimate estimate_ber_mc(const OpticalLink& link, double gate_on,
                                   const BerMcOptions& opts, std::uint64_t seed) {
  if (opts.min_bits < 1 || opts.max_bits < opts.min_bits || opts.chunk_bits == 0) {
    throw std::invalid_argument("inconsistent Monte-Carlo bit budget");
  }
  BerEstimate est;
  const auto model = gaussian_ber(link, gate_on);
  const double n_pix = link.array_size;
  est.threshold = opts.fixed_threshold ? *opts.fixed_threshold : model.threshold(link.array_size);
  // A count sitting exactly on the automatic threshold goes to the nearer
  // class mean; this matters when one class has zero spread.
  const bool tie_to_one = opts.fixed_threshold ||
                          est.threshold - n_pix * model.bit0.mean >=
                              n_pix * model.bit1.mean - est.threshold;
  FrameSimulator sim(link, gate_on, seed, opts.warmup);
  RandomStream data(seed, streams::kDataBits);
  while (est.bits < opts.max_bits &&
         (est.bits < opts.min_bits || est.errors < opts.target_errors)) {
    const std::size_t n =
        static_cast<std::size_t>(std::min<std::uint64_t>(opts.chunk_bits, opts.max_bits - est.bits));
    const auto bits = random_bits(data, n);
    const auto counts = sim.run(bits);
    for (std::size_t k = 0; k < n; ++k) {
      const double c = static_cast<double>(counts[k]);
      const bool decided_one = c > est.threshold || (c == est.threshold && tie_to_one);
      if (decided_one != (bits[k] != 0)) ++est.errors;
    }
    est.bits += n;
  }
  est.ber = static_cast<double>(est.errors) / static_cast<double>(est.bits);
  est.halfwidth = wilson_halfwidth(est.errors, est.bits);
  est.upper_bounded = est.errors < opts.target_errors;
  return est;
}

// ---------------------------------------------------------------------------
// PMF

/// Empirical PMF of the array count on support {0, ..., probability.size()-1},
/// with the Gaussian approximation evaluated on the same support.
struct Pmf {
  std::vector<double> probability;
  std::vector<double> gaussian_approx;
  std::uint64_t trials = 0;

  [[nodiscard]] double mean() const {
    double m = 0.0;
    for (std::size_t k = 0; k < probability.size(); ++k) m += static_cast<double>(k) * probability[k];
    return m;
  }
  [[nodiscard]] double variance() const {
    const double m = mean();
    double v = 0.0;
    for (std::size_t k = 0; k < probability.size(); ++k) {
      const double d = static_cast<double>(k) - m;
      v += d * d * probability[k];
    }
    return v;
  }
};

inline Pmf estimate_pmf(const OpticalLink& link, double gate_on, int bit, std::uint64_t n_trials,
                        std::uint64_t seed, unsigned warmup = kDefaultWarmupSymbols) {
  if (bit != 0 && bit != 1) throw std::invalid_argument("bit must be 0 or 1");
  if (n_trials == 0) throw std::invalid_argument("n_trials must be positive");
  FrameSimulator sim(link, gate_on, seed, warmup);
  RandomStream data(seed, streams::kDataBits);
  std::vector<std::uint64_t> hist;
  std::uint64_t seen = 0;
  while (seen < n_trials) {
    const auto bits = random_bits(data, 1 << 14);
    const auto counts = sim.run(bits);
    for (std::size_t k = 0; k < bits.size() && seen < n_trials; ++k) {
      if (bits[k] != bit) continue;
      if (counts[k] >= hist.size()) hist.resize(counts[k] + 1, 0);
      ++hist[counts[k]];
      ++seen;
    }
  }
  Pmf pmf;
  pmf.trials = seen;
  pmf.probability.resize(hist.size());
  for (std::size_t k = 0; k < hist.size(); ++k) {
    pmf.probability[k] = static_cast<double>(hist[k]) / static_cast<double>(seen);
  }

  const auto model = gaussian_ber(link, gate_on);
  const auto& stats = bit ? model.bit1 : model.bit0;
  const double n = link.array_size;
  const double mu = n * stats.mean;
  const double var = n * stats.variance;
  pmf.gaussian_approx.resize(hist.size(), 0.0);
  for (std::size_t k = 0; k < hist.size(); ++k) {
    const double x = static_cast<double>(k);
    if (var > 0.0) {
      pmf.gaussian_approx[k] =
          std::exp(-0.5 * (x - mu) * (x - mu) / var) / std::sqrt(2.0 * std::numbers::pi * var);
    } else {
      pmf.gaussian_approx[k] = std::abs(x - mu) < 0.5 ? 1.0 : 0.0;
    }
  }
  return pmf;
}

// ---------------------------------------------------------------------------
// Constant-rate moments

/// Runs one pixel at a constant rate for n_symbols after warm-up and hands
/// each symbol's detection offsets to `visit`.
template <class Visitor>
void simulate_constant_rate(PhotonRate rate, const GateTiming& timing, std::uint64_t n_symbols,
                            std::uint64_t seed, unsigned warmup, Visitor&& visit) {
  RandomStream rng(seed, 0);
  PixelState state;
  const auto min_warmup =
      static_cast<unsigned>(std::ceil(timing.dead_time() / timing.symbol_period())) + 1;
  for (unsigned k = 0; k < std::max(warmup, min_warmup); ++k) {
    simulate_symbol(state, rng, rate.hz(), timing);
  }
  std::vector<double> detections;
  for (std::uint64_t k = 0; k < n_symbols; ++k) {
    detections.clear();
    simulate_symbol(state, rng, rate.hz(), timing, &detections);
    visit(std::span<const double>(detections));
  }
}

/// Sample moments of the per-symbol count with batch-means standard errors
/// (counts are correlated across symbols whenever dead time bridges frames).
struct McMoments {
  CountStats stats;
  double mean_se = 0.0;
  double variance_se = 0.0;
  double lag1_autocorrelation = 0.0;
  std::uint64_t trials = 0;
};

inline McMoments estimate_moments_mc(PhotonRate rate, const GateTiming& timing,
                                     std::uint64_t n_trials, std::uint64_t seed,
                                     unsigned warmup = kDefaultWarmupSymbols) {
  if (n_trials < 2) throw std::invalid_argument("need at least two trials");
  constexpr std::uint64_t kTargetBatches = 500;
  const std::uint64_t batch = std::max<std::uint64_t>(1, n_trials / kTargetBatches);
  const std::uint64_t n_batches = n_trials / batch;
  const std::uint64_t used = n_batches * batch;

  std::vector<double> batch_mean(n_batches, 0.0);
  std::vector<double> batch_square(n_batches, 0.0);
  double sum = 0.0;
  double sum_sq = 0.0;
  double sum_cross = 0.0;
  double prev = 0.0;
  std::uint64_t idx = 0;
  simulate_constant_rate(rate, timing, used, seed, warmup, [&](std::span<const double> det) {
    const auto k = static_cast<double>(det.size());
    const std::uint64_t b = idx / batch;
    batch_mean[b] += k;
    batch_square[b] += k * k;
    sum += k;
    sum_sq += k * k;
    if (idx > 0) sum_cross += prev * k;
    prev = k;
    ++idx;
  });

  const double n = static_cast<double>(used);
  McMoments out;
  out.trials = used;
  out.stats.mean = sum / n;
  out.stats.second_moment = sum_sq / n;
  out.stats.variance = std::max(0.0, out.stats.second_moment - out.stats.mean * out.stats.mean);

  const double mu = out.stats.mean;
  double m_acc = 0.0;
  double v_acc = 0.0;
  // Variance estimator linearised around the grand mean: q_b - 2 mu m_b.
  std::vector<double> lin(n_batches);
  for (std::uint64_t b = 0; b < n_batches; ++b) {
    batch_mean[b] /= static_cast<double>(batch);
    batch_square[b] /= static_cast<double>(batch);
    lin[b] = batch_square[b] - 2.0 * mu * batch_mean[b];
  }
  const double lin_bar = out.stats.second_moment - 2.0 * mu * mu;
  for (std::uint64_t b = 0; b < n_batches; ++b) {
    m_acc += (batch_mean[b] - mu) * (batch_mean[b] - mu);
    v_acc += (lin[b] - lin_bar) * (lin[b] - lin_bar);
  }
  const double nb = static_cast<double>(n_batches);
  if (n_batches > 1) {
    out.mean_se = std::sqrt(m_acc / (nb - 1.0) / nb);
    out.variance_se = std::sqrt(v_acc / (nb - 1.0) / nb);
  }
  if (out.stats.variance > 0.0) {
    const double cov = sum_cross / (n - 1.0) - mu * mu;
    out.lag1_autocorrelation = cov / out.stats.variance;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Event traces

/// Full-timeline incident and detected events of every pixel, including
/// gate-OFF arrivals. Symbol 0 starts at t = 0 with an idle detector.
inline std::vector<DetectionRecord> trace_frame(const OpticalLink& link, double gate_on,
                                                std::span<const std::uint8_t> bits,
                                                std::uint64_t seed) {
  const GateTiming timing = link.timing.with_gate_on(gate_on);
  const auto rates = pixel_rates(link);
  const double ts = timing.symbol_period();
  std::vector<DetectionRecord> out;
  out.reserve(link.array_size);
  for (std::uint32_t p = 0; p < link.array_size; ++p) {
    RandomStream rng(seed, streams::kTrace + 1 + p);
    std::vector<double> incident;
    for (std::size_t k = 0; k < bits.size(); ++k) {
      // Fresh gap at each symbol boundary; Poisson streams are memoryless.
      const PhotonRate rate(bits[k] ? rates.bit1 : rates.bit0);
      for (double t : gen_arrivals(rng, rate, ts)) incident.push_back(static_cast<double>(k) * ts + t);
    }
    out.push_back(apply_gated_dead_time(incident, timing));
  }
  return out;
}

/// CSV with header `pixel,time_s,event`; event is `incident` or `detected`.
inline void write_trace_csv(std::ostream& os, std::span<const DetectionRecord> records) {
  const auto old_precision = os.precision(17);
  os << "pixel,time_s,event\n";
  for (std::size_t p = 0; p < records.size(); ++p) {
    for (double t : records[p].incident_times) os << p << ',' << t << ",incident\n";
    for (double t : records[p].detected_times) os << p << ',' << t << ",detected\n";
  }
  os.precision(old_precision);
}

}  // namespace spadgate
