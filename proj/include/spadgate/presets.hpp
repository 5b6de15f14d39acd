#pragma once

// Reference presets fig3..fig9. Every preset shares the
// same receiver constants: 785 nm light, PDE 0.18, T_d = 10 ns.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "spadgate/mc_sim.hpp"
#include "spadgate/scenario.hpp"

namespace spadgate {

enum class PresetKind { Stats, Pmf, Ber };

struct PresetCurve {
  std::string label;
  Scenario scenario;
  int bit = 1;  // PMF curves only
};

struct Preset {
  std::string name;
  std::string description;
  PresetKind kind = PresetKind::Ber;
  std::vector<PresetCurve> curves;
};

struct PresetOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> max_bits;
  std::optional<std::uint64_t> trials;
};

inline constexpr double kPresetWavelength = 785e-9;
inline constexpr double kPresetPde = 0.18;
inline constexpr double kPresetDeadTime = 10e-9;

/// Asserts the shared receiver constants and the array-size / data-rate pairs
/// of the reference links (N = 64 at 50 Mbps, N = 1024 at 200 Mbps).
inline void check_reference_constants(const Preset& p) {
  for (const auto& c : p.curves) {
    const auto& l = c.scenario.link;
    const bool ok_common = l.wavelength == kPresetWavelength && l.pde == kPresetPde &&
                           l.timing.dead_time() == kPresetDeadTime;
    bool ok_rate = true;
    if (p.kind == PresetKind::Ber) {
      const double ts = l.timing.symbol_period();
      ok_rate = (l.array_size == 64 && ts == 20e-9) || (l.array_size == 1024 && ts == 5e-9);
    }
    if (!ok_common || !ok_rate) {
      throw std::logic_error("preset " + p.name + " curve " + c.label +
                             " violates the reference constants");
    }
  }
}

namespace detail {

/// {step, 2 step, ..., count * step}, the last value clamped to `cap`.
inline std::vector<double> stepped(double step, int count, double cap) {
  std::vector<double> v;
  for (int k = 1; k <= count; ++k) v.push_back(std::min(k * step, cap));
  return v;
}

inline OpticalLink reference_link(std::uint32_t n, double ts, double pb_nw, double pr_nw) {
  OpticalLink l;
  l.wavelength = kPresetWavelength;
  l.pde = kPresetPde;
  l.array_size = n;
  l.timing = GateTiming(ts, ts, kPresetDeadTime);
  l.background_power = pb_nw * kNanowatt;
  l.received_power = pr_nw * kNanowatt;
  return l;
}

inline std::string num_label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

}  // namespace detail

inline std::vector<std::string> preset_names() {
  return {"fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9"};
}

inline Preset make_preset(const std::string& name, const PresetOverrides& ov = {}) {
  using detail::num_label;
  using detail::stepped;
  using detail::reference_link;
  Preset p;
  p.name = name;
  McSettings mc;
  if (ov.seed) mc.seed = *ov.seed;

  if (name == "fig3") {
    p.kind = PresetKind::Stats;
    p.description = "mean and variance of the detected count vs T_g, T_s=20 ns, T_d=10 ns";
    mc.trials = ov.trials.value_or(100'000);
    for (double lambda : {1e7, 1e8, 5e8}) {
      Scenario sc;
      sc.link = reference_link(1, 20e-9, 0.0, 0.0);
      sc.mode = Mode::Both;
      sc.axis = SweepAxis::GateOn;
      sc.values = stepped(1e-9, 20, 20e-9);
      sc.lambdas = {lambda};
      sc.mc = mc;
      p.curves.push_back({"lambda_" + num_label(lambda), sc});
    }
  } else if (name == "fig4") {
    p.kind = PresetKind::Pmf;
    p.description = "exact vs Gaussian PMF, lambda0=2e7, lambda1=7e7 Hz, T_s=50 ns, N=64";
    mc.trials = ov.trials.value_or(100'000);
    Scenario sc;
    sc.link = OpticalLink::from_pixel_rates({2e7, 7e7}, 64, GateTiming(50e-9, 50e-9, kPresetDeadTime),
                                            kPresetWavelength, kPresetPde);
    sc.mode = Mode::MonteCarlo;
    sc.mc = mc;
    p.curves.push_back({"bit0", sc, 0});
    p.curves.push_back({"bit1", sc, 1});
  } else if (name == "fig5" || name == "fig6" || name == "fig8") {
    const bool small = name != "fig8";
    if (name == "fig5") {
      p.description = "BER vs T_g, N=64, P_b=7 nW, 50 Mbps";
      for (double pr : {8.0, 10.0, 12.0, 15.0}) {
        Scenario sc;
        sc.link = reference_link(64, 20e-9, 7.0, pr);
        sc.axis = SweepAxis::GateOn;
        sc.values = stepped(0.1e-9, 200, 20e-9);
        p.curves.push_back({"pr_" + num_label(pr) + "nw", sc});
      }
    } else {
      p.description = small ? "optimal T_g vs P_R, N=64, 50 Mbps"
                            : "optimal T_g vs P_R, N=1024, 200 Mbps";
      const std::vector<double> backgrounds =
          small ? std::vector<double>{0.5, 1.5, 3.0} : std::vector<double>{40.0, 80.0};
      for (double pb : backgrounds) {
        Scenario sc;
        sc.link = small ? reference_link(64, 20e-9, pb, 0.0) : reference_link(1024, 5e-9, pb, 0.0);
        sc.axis = SweepAxis::ReceivedPower;
        sc.optimize_gate = true;
        sc.values = small ? stepped(1.0 * kNanowatt, 10, 1e300) : stepped(10.0 * kNanowatt, 10, 1e300);
        p.curves.push_back({"pb_" + num_label(pb) + "nw", sc});
      }
    }
  } else if (name == "fig7" || name == "fig9") {
    const bool small = name == "fig7";
    p.description = small ? "BER vs P_R, N=64, 50 Mbps, gated and free-running, analytic and MC"
                          : "BER vs P_R, N=1024, 200 Mbps, gated and free-running, analytic and MC";
    mc.max_bits = ov.max_bits.value_or(small ? 1'000'000 : 100'000);
    const std::vector<double> backgrounds =
        small ? std::vector<double>{1.5, 3.0} : std::vector<double>{40.0, 80.0};
    for (double pb : backgrounds) {
      for (bool gated : {true, false}) {
        Scenario sc;
        sc.link = small ? reference_link(64, 20e-9, pb, 0.0) : reference_link(1024, 5e-9, pb, 0.0);
        sc.mode = Mode::Both;
        sc.axis = SweepAxis::ReceivedPower;
        sc.optimize_gate = gated;
        sc.values = small ? stepped(1.0 * kNanowatt, 10, 1e300) : stepped(10.0 * kNanowatt, 10, 1e300);
        sc.mc = mc;
        p.curves.push_back({"pb_" + num_label(pb) + "nw_" + (gated ? "gated" : "free"), sc});
      }
    }
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  p.kind = name == "fig3" ? PresetKind::Stats : name == "fig4" ? PresetKind::Pmf : PresetKind::Ber;
  check_reference_constants(p);
  return p;
}

inline void write_pmf_csv(std::ostream& os, const Pmf& pmf) {
  os << "count,pmf_exact,pmf_gaussian\n";
  for (std::size_t k = 0; k < pmf.probability.size(); ++k) {
    os << k << ',' << format_number(pmf.probability[k]) << ','
       << format_number(pmf.gaussian_approx[k]) << '\n';
  }
}

/// Writes one CSV per curve, either to `<prefix>_<label>.csv` or, without a
/// prefix, as `# label`-headed blocks separated by blank lines on `csv_out`.
/// Human-readable progress and warnings go to `log`.
inline void run_preset(const Preset& p, std::ostream& csv_out, std::ostream& log,
                       const std::optional<std::string>& prefix = std::nullopt) {
  log << "preset " << p.name << ": " << p.description << '\n';
  bool first = true;
  for (const auto& curve : p.curves) {
    std::ofstream file;
    std::ostream* os = &csv_out;
    if (prefix) {
      const std::string path = *prefix + "_" + curve.label + ".csv";
      file.open(path);
      if (!file) throw std::runtime_error("cannot write " + path);
      os = &file;
      log << "  writing " << path << '\n';
    } else {
      if (!first) *os << "\n\n";
      *os << "# " << curve.label << '\n';
    }
    first = false;
    const auto& sc = curve.scenario;
    switch (p.kind) {
      case PresetKind::Stats:
        write_stats_csv(*os, run_stats(sc));
        break;
      case PresetKind::Pmf:
        write_pmf_csv(*os, estimate_pmf(sc.link, sc.link.timing.gate_on(), curve.bit, sc.mc.trials,
                                        sc.mc.seed, sc.mc.warmup));
        break;
      case PresetKind::Ber: {
        const auto res = run_scenario(sc);
        for (const auto& w : res.warnings) log << "  " << curve.label << ": " << w << '\n';
        write_ber_csv(*os, sc, res.rows);
        break;
      }
    }
  }
}

}  // namespace spadgate
