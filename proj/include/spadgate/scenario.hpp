#pragma once

// Scenario configuration (JSON), sweep execution and CSV emission for the
// command-line harness. Units at this boundary: nanoseconds, nanowatts,
// nanometres and Hz; they are converted to SI once, at ingestion.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "spadgate/link_ber.hpp"
#include "spadgate/mc_sim.hpp"
#include "spadgate/photon_stats.hpp"

namespace spadgate {

/// Invalid configuration; what() names the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : std::runtime_error("config field '" + field + "': " + message), field_(field) {}
  [[nodiscard]] const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class Mode { Analytic, MonteCarlo, Both };

inline bool wants_analytic(Mode m) { return m != Mode::MonteCarlo; }
inline bool wants_mc(Mode m) { return m != Mode::Analytic; }

struct McSettings {
  std::uint64_t seed = 1;
  unsigned warmup = kDefaultWarmupSymbols;
  std::uint64_t min_bits = 10'000;
  std::uint64_t max_bits = 1'000'000;
  std::uint64_t target_errors = 100;
  std::uint64_t trials = 1'000'000;  // constant-rate moment estimates
  std::optional<double> threshold;   // fixed array-count decision threshold

  [[nodiscard]] BerMcOptions ber_options() const {
    BerMcOptions o;
    o.min_bits = min_bits;
    o.max_bits = std::max(max_bits, min_bits);
    o.target_errors = target_errors;
    o.warmup = warmup;
    o.fixed_threshold = threshold;
    return o;
  }
};

struct Scenario {
  std::string label;
  OpticalLink link;
  Mode mode = Mode::Analytic;
  SweepAxis axis = SweepAxis::GateOn;
  std::vector<double> values;  // SI units: seconds or watts
  bool optimize_gate = false;
  double grid_step = 0.02e-9;
  std::vector<double> lambdas;  // explicit rates for the stats command, Hz
  McSettings mc;
  std::string output;
};

namespace detail {

inline const nlohmann::json* find(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

inline double get_number(const nlohmann::json& j, const char* key, double fallback,
                         const std::string& prefix = "") {
  const auto* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_number()) throw ConfigError(prefix + key, "expected a number");
  return v->get<double>();
}

inline double require_number(const nlohmann::json& j, const char* key,
                             const std::string& prefix = "") {
  if (!find(j, key)) throw ConfigError(prefix + key, "required field is missing");
  return get_number(j, key, 0.0, prefix);
}

inline std::uint64_t get_count(const nlohmann::json& j, const char* key, std::uint64_t fallback,
                               const std::string& prefix = "") {
  const auto* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_number() || v->get<double>() < 0.0 ||
      v->get<double>() != std::floor(v->get<double>())) {
    throw ConfigError(prefix + key, "expected a non-negative integer");
  }
  return static_cast<std::uint64_t>(v->get<double>());
}

inline std::vector<double> get_numbers(const nlohmann::json& j, const char* key,
                                       const std::string& prefix = "") {
  std::vector<double> out;
  const auto* v = find(j, key);
  if (!v) return out;
  if (!v->is_array()) throw ConfigError(prefix + key, "expected an array of numbers");
  for (const auto& x : *v) {
    if (!x.is_number()) throw ConfigError(prefix + key, "expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed,
                           const std::string& prefix = "") {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) throw ConfigError(prefix + key, "unknown field");
  }
}

}  // namespace detail

inline Scenario parse_scenario(const nlohmann::json& j) {
  using namespace detail;
  if (!j.is_object()) throw ConfigError("<root>", "expected a JSON object");
  reject_unknown(j, {"label", "wavelength_nm", "pde", "array_size", "symbol_period_ns",
                     "dead_time_ns", "gate_on_ns", "received_power_nw", "background_power_nw",
                     "mode", "sweep", "optimize_gate", "grid_step_ns", "lambda_hz", "mc",
                     "output", "validation"});
  Scenario sc;
  if (const auto* v = find(j, "label")) sc.label = v->get<std::string>();

  const double ts_ns = require_number(j, "symbol_period_ns");
  const double td_ns = get_number(j, "dead_time_ns", 10.0);
  const double tg_ns = get_number(j, "gate_on_ns", ts_ns);
  if (!(ts_ns > 0.0)) throw ConfigError("symbol_period_ns", "must be > 0");
  if (!(td_ns > 0.0)) throw ConfigError("dead_time_ns", "must be > 0");
  if (!(tg_ns > 0.0 && tg_ns <= ts_ns)) {
    throw ConfigError("gate_on_ns", "must satisfy 0 < gate_on_ns <= symbol_period_ns");
  }
  sc.link.timing = GateTiming(ts_ns * kNanosecond, tg_ns * kNanosecond, td_ns * kNanosecond);

  sc.link.wavelength = get_number(j, "wavelength_nm", 785.0) * 1e-9;
  if (!(sc.link.wavelength > 0.0)) throw ConfigError("wavelength_nm", "must be > 0");
  sc.link.pde = get_number(j, "pde", 0.18);
  if (!(sc.link.pde > 0.0 && sc.link.pde <= 1.0)) throw ConfigError("pde", "must lie in (0, 1]");
  const auto n = get_count(j, "array_size", 1);
  if (n < 1 || n > 1'000'000) throw ConfigError("array_size", "must lie in [1, 1000000]");
  sc.link.array_size = static_cast<std::uint32_t>(n);
  sc.link.received_power = get_number(j, "received_power_nw", 0.0) * kNanowatt;
  if (!(sc.link.received_power >= 0.0)) throw ConfigError("received_power_nw", "must be >= 0");
  sc.link.background_power = get_number(j, "background_power_nw", 0.0) * kNanowatt;
  if (!(sc.link.background_power >= 0.0)) {
    throw ConfigError("background_power_nw", "must be >= 0");
  }

  if (const auto* v = find(j, "mode")) {
    const auto m = v->is_string() ? v->get<std::string>() : std::string{};
    if (m == "analytic") sc.mode = Mode::Analytic;
    else if (m == "mc") sc.mode = Mode::MonteCarlo;
    else if (m == "both") sc.mode = Mode::Both;
    else throw ConfigError("mode", "expected one of analytic, mc, both");
  }
  if (const auto* v = find(j, "optimize_gate")) {
    if (!v->is_boolean()) throw ConfigError("optimize_gate", "expected true or false");
    sc.optimize_gate = v->get<bool>();
  }
  sc.grid_step = get_number(j, "grid_step_ns", 0.02) * kNanosecond;
  if (!(sc.grid_step > 0.0)) throw ConfigError("grid_step_ns", "must be > 0");

  if (const auto* sw = find(j, "sweep")) {
    if (!sw->is_object()) throw ConfigError("sweep", "expected an object");
    reject_unknown(*sw, {"axis", "values"}, "sweep.");
    const auto* axis = find(*sw, "axis");
    const std::string name = axis && axis->is_string() ? axis->get<std::string>() : "";
    double unit = 0.0;
    if (name == "tg_ns") {
      sc.axis = SweepAxis::GateOn;
      unit = kNanosecond;
    } else if (name == "pr_nw") {
      sc.axis = SweepAxis::ReceivedPower;
      unit = kNanowatt;
    } else {
      throw ConfigError("sweep.axis", "expected tg_ns or pr_nw");
    }
    if (!find(*sw, "values")) throw ConfigError("sweep.values", "required field is missing");
    const auto raw = get_numbers(*sw, "values", "sweep.");
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (!(raw[i] > 0.0)) throw ConfigError("sweep.values", "values must be positive");
      if (i > 0 && raw[i] < raw[i - 1]) throw ConfigError("sweep.values", "values must be sorted");
      if (sc.axis == SweepAxis::GateOn && raw[i] > ts_ns) {
        throw ConfigError("sweep.values", "gate-ON values must not exceed symbol_period_ns");
      }
      sc.values.push_back(raw[i] * unit);
    }
  } else if (sc.optimize_gate) {
    sc.axis = SweepAxis::ReceivedPower;
    sc.values = {sc.link.received_power > 0.0 ? sc.link.received_power : kNanowatt};
  } else {
    sc.axis = SweepAxis::GateOn;
    sc.values = {sc.link.timing.gate_on()};
  }

  sc.lambdas = get_numbers(j, "lambda_hz");
  for (double l : sc.lambdas) {
    if (!(l >= 0.0)) throw ConfigError("lambda_hz", "rates must be >= 0");
  }

  if (const auto* mc = find(j, "mc")) {
    if (!mc->is_object()) throw ConfigError("mc", "expected an object");
    reject_unknown(*mc, {"seed", "warmup", "min_bits", "max_bits", "target_errors", "trials",
                         "threshold"},
                   "mc.");
    sc.mc.seed = get_count(*mc, "seed", sc.mc.seed, "mc.");
    sc.mc.warmup = static_cast<unsigned>(get_count(*mc, "warmup", sc.mc.warmup, "mc."));
    sc.mc.min_bits = get_count(*mc, "min_bits", sc.mc.min_bits, "mc.");
    sc.mc.max_bits = get_count(*mc, "max_bits", sc.mc.max_bits, "mc.");
    sc.mc.target_errors = get_count(*mc, "target_errors", sc.mc.target_errors, "mc.");
    sc.mc.trials = get_count(*mc, "trials", sc.mc.trials, "mc.");
    if (find(*mc, "threshold")) sc.mc.threshold = get_number(*mc, "threshold", 0.0, "mc.");
    if (sc.mc.min_bits < 1) throw ConfigError("mc.min_bits", "must be >= 1");
    if (sc.mc.max_bits < sc.mc.min_bits) throw ConfigError("mc.max_bits", "must be >= mc.min_bits");
    if (sc.mc.trials < 2) throw ConfigError("mc.trials", "must be >= 2");
  }
  if (const auto* v = find(j, "output")) sc.output = v->get<std::string>();
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<file>", std::string("JSON parse error: ") + e.what());
  }
  return parse_scenario(j);
}

/// Per-row seed so each sweep point draws from its own streams.
inline std::uint64_t row_seed(std::uint64_t seed, std::size_t row) {
  return seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(row) + 1);
}

struct ScenarioResult {
  std::vector<BerPoint> rows;
  std::vector<std::string> warnings;
};

inline ScenarioResult run_scenario(const Scenario& sc) {
  ScenarioResult res;
  SweepOptions opts;
  opts.optimize_gate = sc.optimize_gate;
  opts.optimizer.grid_step = sc.grid_step;
  res.rows = sweep(sc.link, sc.axis, sc.values, opts);
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    auto& row = res.rows[i];
    if (!wants_mc(sc.mode)) continue;
    OpticalLink link = sc.link;
    if (sc.axis == SweepAxis::ReceivedPower) link.received_power = row.axis_value;
    const auto est = estimate_ber_mc(link, row.gate_on, sc.mc.ber_options(), row_seed(sc.mc.seed, i));
    row.ber_mc = est.ber;
    row.mc_halfwidth = est.halfwidth;
    if (est.upper_bounded) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "warning: MC reached %llu bits with %llu errors (< %llu) at axis value %.6g; "
                    "BER is upper-bounded only",
                    static_cast<unsigned long long>(est.bits),
                    static_cast<unsigned long long>(est.errors),
                    static_cast<unsigned long long>(sc.mc.target_errors),
                    sc.axis == SweepAxis::GateOn ? row.axis_value / kNanosecond
                                                 : row.axis_value / kNanowatt);
      res.warnings.emplace_back(buf);
    }
  }
  return res;
}

inline std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline constexpr const char* kBerCsvHeader =
    "axis_value,ber_analytic,ber_mc,mc_halfwidth,tg_star,u0,u1,var0,var1";

/// axis_value is written in CLI units (ns or nW); tg_star in ns.
inline void write_ber_csv(std::ostream& os, const Scenario& sc, const std::vector<BerPoint>& rows) {
  os << kBerCsvHeader << '\n';
  const double axis_unit = sc.axis == SweepAxis::GateOn ? kNanosecond : kNanowatt;
  for (const auto& r : rows) {
    os << format_number(r.axis_value / axis_unit) << ','
       << (wants_analytic(sc.mode) ? format_number(r.ber_analytic) : "") << ','
       << (r.ber_mc ? format_number(*r.ber_mc) : "") << ','
       << (r.mc_halfwidth ? format_number(*r.mc_halfwidth) : "") << ','
       << format_number(r.gate_on / kNanosecond) << ',' << format_number(r.bit0.mean) << ','
       << format_number(r.bit1.mean) << ',' << format_number(r.bit0.variance) << ','
       << format_number(r.bit1.variance) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Count statistics tables

struct StatsRow {
  double lambda = 0.0;
  double gate_on = 0.0;
  CountStats analytic;
  std::optional<McMoments> mc;
};

inline constexpr const char* kStatsCsvHeader =
    "lambda_hz,tg_ns,mean,second_moment,variance,mc_mean,mc_mean_se,mc_variance,mc_variance_se";

/// Mean/variance table over (rates x gate-ON values). Rates default to the
/// link's per-pixel bit-0 and bit-1 rates.
inline std::vector<StatsRow> run_stats(const Scenario& sc) {
  std::vector<double> rates = sc.lambdas;
  if (rates.empty()) {
    const auto rp = pixel_rates(sc.link);
    rates = {rp.bit0, rp.bit1};
  }
  std::vector<double> gates = sc.values;
  if (sc.axis != SweepAxis::GateOn || gates.empty()) gates = {sc.link.timing.gate_on()};
  std::vector<StatsRow> rows;
  for (double l : rates) {
    for (double tg : gates) rows.push_back({l, tg, {}, std::nullopt});
  }
  parallel_for(rows.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto& r = rows[i];
      const auto timing = sc.link.timing.with_gate_on(r.gate_on);
      r.analytic = count_stats(PhotonRate(r.lambda), timing);
      if (wants_mc(sc.mode)) {
        r.mc = estimate_moments_mc(PhotonRate(r.lambda), timing, sc.mc.trials,
                                   row_seed(sc.mc.seed, i), sc.mc.warmup);
      }
    }
  });
  return rows;
}

inline void write_stats_csv(std::ostream& os, const std::vector<StatsRow>& rows) {
  os << kStatsCsvHeader << '\n';
  for (const auto& r : rows) {
    os << format_number(r.lambda) << ',' << format_number(r.gate_on / kNanosecond) << ','
       << format_number(r.analytic.mean) << ',' << format_number(r.analytic.second_moment) << ','
       << format_number(r.analytic.variance);
    if (r.mc) {
      os << ',' << format_number(r.mc->stats.mean) << ',' << format_number(r.mc->mean_se) << ','
         << format_number(r.mc->stats.variance) << ',' << format_number(r.mc->variance_se);
    } else {
      os << ",,,,";
    }
    os << '\n';
  }
}

}  // namespace spadgate
