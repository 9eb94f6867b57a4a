#pragma once

// Side-by-side runs of the Lindblad, Fokker-Planck and mixture dynamics from
// one configuration, and the reports written from them.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcc/config.hpp"
#include "qcc/mixture.hpp"

namespace qcc {

/// The error budget is undefined for this configuration (no diffusion and no
/// z cap).
class BoundNotApplicable : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ComparisonRow {
  double t = 0.0;
  double trace_distance = 0.0;  // mixture vs Lindblad
  double l1_distance = 0.0;     // mixture vs Fokker-Planck
  double epsilon = 0.0;
  double max_squeeze = 1.0;     // over particles at this snapshot
  bool pass_trace = false;
  bool pass_l1 = false;
};

struct ComparisonReport {
  ScaleReport scales;
  double T = 0.0;
  double margin = 0.1;
  double abs_tol = 0.0;
  bool bound_applicable = true;
  double z = 1.0;
  std::vector<ComparisonRow> rows;
  MixtureDiagnostics diagnostics;
  double quantum_dt = 0.0, classical_dt = 0.0, mixture_dt = 0.0;
  long particles = 0;
  double final_trace = 1.0;       // Lindblad state
  double final_mass = 1.0;        // Fokker-Planck field
  double classical_leak = 0.0;   // 1 - final_mass

  /// measured <= epsilon (1 + margin) + abs_tol for both distances at every row.
  bool passed() const;
  std::string summary() const;
};

/// Runs all three dynamics to config T with snapshots at k T / snapshots.
/// Requires dims = 1. Throws BoundNotApplicable when z is unbounded and no
/// cap is configured.
ComparisonReport run_comparison(const ExperimentConfig& config);

struct BreakdownRow {
  double t = 0.0;
  double min_ratio_closed = 0.0;  // min W / max W
  double min_ratio_open = 0.0;
  double negative_volume_closed = 0.0;  // integral of the negative part of W
  double negative_volume_open = 0.0;
};

struct BreakdownReport {
  ScaleReport scales;   // of the diffusive run
  double T = 0.0;
  std::optional<double> ehrenfest_time;  // needs a Lyapunov exponent in the config
  /// Least D0 with epsilon(T) = max(1, floor); the floor case is D0 = hbar/s_H.
  /// Empty for harmonic potentials.
  std::optional<double> threshold_d0;
  std::vector<BreakdownRow> rows;

  /// Most negative min W / max W of each run at or after `from`.
  double worst_closed(double from = 0.0) const;
  double worst_open(double from = 0.0) const;
  std::string summary() const;
};

/// Evolves the configured initial state twice on the quantum grid: without
/// diffusion and with the configured diffusion. Requires dims = 1 and
/// non-zero configured diffusion.
BreakdownReport run_breakdown_demo(const ExperimentConfig& config);

/// comparison.csv (t,t_over_tau,trace_distance,l1_distance,epsilon,bound,
/// max_squeeze,pass_trace,pass_l1), plot_comparison.py and summary.txt.
void emit_plots(const ComparisonReport& report, const std::string& dir);

/// breakdown.csv (t,t_over_tau,min_ratio_closed,min_ratio_open,
/// negative_volume_closed,negative_volume_open), plot_breakdown.py and
/// summary.txt.
void emit_plots(const BreakdownReport& report, const std::string& dir);

/// Fixed-format number used in every CSV written by the harness.
std::string csv_number(double v);

}  // namespace qcc
