#pragma once

// spad-gate <stats|ber|opt-tg|mc|validate|preset> [--config FILE] [--seed U64] [--out PATH]

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spadgate/mc_sim.hpp"
#include "spadgate/presets.hpp"
#include "spadgate/scenario.hpp"
#include "spadgate/validate.hpp"

namespace spadgate {

namespace detail {

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

inline void add_common(CLI::App* cmd, CommonArgs& args, bool config_required) {
  auto* cfg = cmd->add_option("--config", args.config, "JSON scenario file");
  if (config_required) cfg->required();
  cmd->add_option("--seed", args.seed, "Monte-Carlo seed (overrides config)");
  cmd->add_option("--out", args.out, "output CSV path (default: stdout)");
}

/// Runs `emit` against the --out file, the config's output path, or stdout.
template <class Emit>
void with_output(const std::string& cli_out, const std::string& cfg_out, std::ostream& fallback,
                 Emit&& emit) {
  const std::string& path = cli_out.empty() ? cfg_out : cli_out;
  if (path.empty()) {
    emit(fallback);
    return;
  }
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot write " + path);
  emit(file);
}

inline Scenario load_with_seed(const CommonArgs& args) {
  Scenario sc = load_scenario(args.config);
  if (args.seed) sc.mc.seed = *args.seed;
  return sc;
}

inline ValidationGrid parse_validation_grid(const nlohmann::json& j) {
  ValidationGrid g = fig3_grid();
  const auto* v = detail::find(j, "validation");
  if (!v) return g;
  if (!v->is_object()) throw ConfigError("validation", "expected an object");
  reject_unknown(*v, {"lambda_hz", "gate_on_ns", "symbol_period_ns", "dead_time_ns",
                      "mc_dead_time_ns"},
                 "validation.");
  g.symbol_period = get_number(*v, "symbol_period_ns", 20.0, "validation.") * kNanosecond;
  g.dead_time = get_number(*v, "dead_time_ns", 10.0, "validation.") * kNanosecond;
  if (find(*v, "lambda_hz")) g.lambdas = get_numbers(*v, "lambda_hz", "validation.");
  if (find(*v, "gate_on_ns")) {
    g.gate_ons.clear();
    for (double x : get_numbers(*v, "gate_on_ns", "validation.")) g.gate_ons.push_back(x * kNanosecond);
  }
  if (find(*v, "mc_dead_time_ns")) {
    g.mc_dead_time = get_number(*v, "mc_dead_time_ns", 0.0, "validation.") * kNanosecond;
  }
  if (g.lambdas.empty() || g.gate_ons.empty()) {
    throw ConfigError("validation", "grid must be nonempty");
  }
  for (double tg : g.gate_ons) {
    if (!(tg > 0.0 && tg <= g.symbol_period)) {
      throw ConfigError("validation.gate_on_ns", "values must lie in (0, symbol_period_ns]");
    }
  }
  return g;
}

}  // namespace detail

/// Entry point of the spad-gate tool. Returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Time-gated SPAD receiver statistics, BER and Monte-Carlo harness", "spad-gate"};
  app.require_subcommand(1);

  detail::CommonArgs stats_args, ber_args, opt_args, mc_args, val_args, preset_args;
  auto* stats = app.add_subcommand("stats", "mean / second moment / variance table");
  detail::add_common(stats, stats_args, true);
  auto* ber = app.add_subcommand("ber", "BER sweep (mode taken from the config)");
  detail::add_common(ber, ber_args, true);
  auto* opt = app.add_subcommand("opt-tg", "optimal gate-ON time per received power");
  detail::add_common(opt, opt_args, true);
  auto* mc = app.add_subcommand("mc", "Monte-Carlo BER sweep");
  detail::add_common(mc, mc_args, true);
  std::string trace_path;
  std::uint64_t trace_symbols = 20;
  mc->add_option("--trace", trace_path, "write an event trace CSV of a short run");
  mc->add_option("--trace-symbols", trace_symbols, "symbols in the event trace");
  auto* val = app.add_subcommand("validate", "analytic vs Monte-Carlo moment check");
  detail::add_common(val, val_args, false);
  std::uint64_t val_trials = 1'000'000;
  val->add_option("--trials", val_trials, "symbols per grid point");
  auto* pre = app.add_subcommand("preset", "reproduce a figure preset");
  detail::add_common(pre, preset_args, false);
  std::string preset_name;
  pre->add_option("name", preset_name, "fig3 .. fig9")->required();
  std::optional<std::uint64_t> preset_bits;
  std::optional<std::uint64_t> preset_trials;
  pre->add_option("--max-bits", preset_bits, "Monte-Carlo bit cap per point");
  pre->add_option("--trials", preset_trials, "Monte-Carlo trials for moment/PMF presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (*stats) {
      const Scenario sc = detail::load_with_seed(stats_args);
      const auto rows = run_stats(sc);
      detail::with_output(stats_args.out, sc.output, out,
                          [&](std::ostream& os) { write_stats_csv(os, rows); });
      return 0;
    }
    if (*ber || *opt || *mc) {
      const auto& args = *ber ? ber_args : *opt ? opt_args : mc_args;
      Scenario sc = detail::load_with_seed(args);
      if (*opt) {
        sc.mode = Mode::Analytic;
        sc.optimize_gate = true;
        if (sc.axis != SweepAxis::ReceivedPower) {
          sc.axis = SweepAxis::ReceivedPower;
          sc.values = {sc.link.received_power > 0.0 ? sc.link.received_power : kNanowatt};
        }
      }
      if (*mc && sc.mode == Mode::Analytic) sc.mode = Mode::MonteCarlo;
      const auto res = run_scenario(sc);
      for (const auto& w : res.warnings) err << w << '\n';
      detail::with_output(args.out, sc.output, out,
                          [&](std::ostream& os) { write_ber_csv(os, sc, res.rows); });
      if (*mc && !trace_path.empty()) {
        RandomStream bit_rng(sc.mc.seed, streams::kDataBits);
        const auto bits = random_bits(bit_rng, static_cast<std::size_t>(trace_symbols));
        const auto records = trace_frame(sc.link, sc.link.timing.gate_on(), bits, sc.mc.seed);
        std::ofstream trace(trace_path);
        if (!trace) throw std::runtime_error("cannot write " + trace_path);
        write_trace_csv(trace, records);
      }
      if (*opt) {
        for (const auto& r : res.rows) {
          err << "P_R=" << format_number(r.axis_value / kNanowatt)
              << " nW: T_g*=" << format_number(r.gate_on / kNanosecond)
              << " ns, BER=" << format_number(r.ber_analytic) << '\n';
        }
      }
      return 0;
    }
    if (*val) {
      ValidationGrid grid = fig3_grid();
      std::uint64_t seed = val_args.seed.value_or(1);
      std::string cfg_out;
      if (!val_args.config.empty()) {
        std::ifstream in(val_args.config);
        if (!in) throw ConfigError("<file>", "cannot open " + val_args.config);
        nlohmann::json j;
        try {
          in >> j;
        } catch (const nlohmann::json::parse_error& e) {
          throw ConfigError("<file>", std::string("JSON parse error: ") + e.what());
        }
        grid = detail::parse_validation_grid(j);
        if (const auto* m = detail::find(j, "mc")) {
          if (!val_args.seed) seed = detail::get_count(*m, "seed", seed, "mc.");
          if (val->count("--trials") == 0) val_trials = detail::get_count(*m, "trials", val_trials, "mc.");
        }
        if (const auto* o = detail::find(j, "output")) cfg_out = o->get<std::string>();
      }
      if (val_trials < 2) throw ConfigError("--trials", "must be >= 2");
      const auto rep = run_validation(grid, val_trials, seed);
      detail::with_output(val_args.out, cfg_out, out,
                          [&](std::ostream& os) { write_validation_report(os, rep); });
      err << (rep.passed() ? "validate: PASS" : "validate: FAIL") << " (" << rep.rows.size()
          << " points, |z| <= " << rep.z_limit << ")\n";
      return rep.passed() ? 0 : 3;
    }
    if (*pre) {
      PresetOverrides ov;
      ov.seed = preset_args.seed;
      ov.max_bits = preset_bits;
      ov.trials = preset_trials;
      const Preset p = make_preset(preset_name, ov);
      std::optional<std::string> prefix;
      if (!preset_args.out.empty()) {
        std::string stem = preset_args.out;
        if (stem.size() > 4 && stem.ends_with(".csv")) stem.resize(stem.size() - 4);
        prefix = stem;
      }
      run_preset(p, out, err, prefix);
      return 0;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace spadgate
