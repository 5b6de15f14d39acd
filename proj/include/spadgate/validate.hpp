#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <vector>

#include "spadgate/mc_sim.hpp"
#include "spadgate/parallel.hpp"
#include "spadgate/photon_stats.hpp"
#include "spadgate/scenario.hpp"

namespace spadgate {

/// Analytic-vs-MC agreement grid for constant-rate count statistics.
struct ValidationGrid {
  std::vector<double> lambdas;   // Hz
  std::vector<double> gate_ons;  // s
  double symbol_period = 20e-9;
  double dead_time = 10e-9;
  std::optional<double> mc_dead_time;  // fault injection: simulate a different T_d
};

/// Three rates by twenty gate-ON values at T_s = 20 ns, T_d = 10 ns.
inline ValidationGrid fig3_grid() {
  ValidationGrid g;
  g.lambdas = {1e7, 1e8, 5e8};
  for (int k = 1; k <= 20; ++k) g.gate_ons.push_back(k * kNanosecond);
  g.gate_ons.back() = g.symbol_period;
  return g;
}

struct ValidationRow {
  double lambda = 0.0;
  double gate_on = 0.0;
  CountStats analytic;
  McMoments mc;
  double z_mean = 0.0;
  double z_variance = 0.0;
  bool pass = false;
};

struct ValidationReport {
  std::vector<ValidationRow> rows;
  double z_limit = 4.0;

  [[nodiscard]] bool passed() const {
    for (const auto& r : rows) {
      if (!r.pass) return false;
    }
    return !rows.empty();
  }
};

/// |analytic - mc| / se; zero-SE points only pass on exact agreement.
inline double standardized_gap(double analytic, double mc, double se) {
  const double gap = std::abs(analytic - mc);
  if (se > 0.0) return gap / se;
  return gap <= 1e-12 ? 0.0 : std::numeric_limits<double>::infinity();
}

inline ValidationReport run_validation(const ValidationGrid& grid, std::uint64_t trials,
                                       std::uint64_t seed, double z_limit = 4.0) {
  if (grid.lambdas.empty() || grid.gate_ons.empty()) {
    throw std::invalid_argument("validation grid must be nonempty");
  }
  ValidationReport rep;
  rep.z_limit = z_limit;
  for (double l : grid.lambdas) {
    for (double tg : grid.gate_ons) rep.rows.push_back({l, tg, {}, {}, 0.0, 0.0, false});
  }
  parallel_for(rep.rows.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto& r = rep.rows[i];
      const GateTiming timing(grid.symbol_period, r.gate_on, grid.dead_time);
      r.analytic = count_stats(PhotonRate(r.lambda), timing);
      const GateTiming sim_timing =
          grid.mc_dead_time ? timing.with_dead_time(*grid.mc_dead_time) : timing;
      r.mc = estimate_moments_mc(PhotonRate(r.lambda), sim_timing, trials, row_seed(seed, i));
      r.z_mean = standardized_gap(r.analytic.mean, r.mc.stats.mean, r.mc.mean_se);
      r.z_variance = standardized_gap(r.analytic.variance, r.mc.stats.variance, r.mc.variance_se);
      r.pass = r.z_mean <= z_limit && r.z_variance <= z_limit;
    }
  });
  return rep;
}

inline void write_validation_report(std::ostream& os, const ValidationReport& rep) {
  os << "lambda_hz,tg_ns,mean,mc_mean,z_mean,variance,mc_variance,z_variance,status\n";
  for (const auto& r : rep.rows) {
    os << format_number(r.lambda) << ',' << format_number(r.gate_on / kNanosecond) << ','
       << format_number(r.analytic.mean) << ',' << format_number(r.mc.stats.mean) << ','
       << format_number(r.z_mean) << ',' << format_number(r.analytic.variance) << ','
       << format_number(r.mc.stats.variance) << ',' << format_number(r.z_variance) << ','
       << (r.pass ? "PASS" : "FAIL") << '\n';
  }
}

}  // namespace spadgate
