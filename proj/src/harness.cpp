#include "qcc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qcc/fokker_planck.hpp"
#include "qcc/lindblad.hpp"

namespace qcc {

std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

namespace {

void require_one_dimension(const ResolvedExperiment& r, const char* what) {
  if (r.model.dims != 1) throw std::invalid_argument(std::string(what) + " requires dims = 1");
  if (r.components.empty()) throw std::invalid_argument(std::string(what) + " requires at least one [initial] section");
}

double total_weight(const ResolvedExperiment& r) {
  double s = 0.0;
  for (const auto& c : r.components) s += c.first;
  if (!(s > 0.0)) throw std::invalid_argument("initial weights sum to zero");
  return s;
}

QuantumGrid quantum_grid(const ExperimentConfig& c) {
  QuantumGrid g{c.quantum.n, c.quantum.x_min, c.quantum.x_max};
  g.validate();
  return g;
}

PhaseGrid phase_grid(const ExperimentConfig& c) {
  PhaseGrid g{c.phase.nx, c.phase.np, c.phase.x_min, c.phase.x_max, c.phase.p_min, c.phase.p_max};
  g.validate();
  return g;
}

Sampling sampling_for(FpScheme s) { return s == FpScheme::spectral ? Sampling::point : Sampling::cell_average; }

DensityMatrixGrid initial_density(const ResolvedExperiment& r, const QuantumGrid& grid) {
  const double total = total_weight(r);
  DensityMatrixGrid rho;
  for (std::size_t i = 0; i < r.components.size(); ++i) {
    DensityMatrixGrid part = gaussian_to_grid(r.components[i].second, grid, r.model.mass);
    if (i == 0) {
      rho = part;
      rho.rho *= r.components[i].first / total;
    } else {
      rho.rho += (r.components[i].first / total) * part.rho;
    }
  }
  return rho;
}

PhaseField initial_field(const ResolvedExperiment& r, const PhaseGrid& grid, Sampling sampling) {
  const double total = total_weight(r);
  PhaseField f(grid);
  for (const auto& [w, s] : r.components) add_gaussian(f, w / total, s.mean, s.cov, sampling);
  return f;
}

double quantum_dt(const ExperimentConfig& c, const ResolvedExperiment& r, const QuantumGrid& grid) {
  if (c.quantum.dt) return *c.quantum.dt;
  if (c.quantum.method == LindbladMethod::split) return r.scales.tau_H / 100.0;
  LindbladSolver probe(grid, r.model, r.diffusion);
  return 0.9 * probe.max_stable_dt();
}

double classical_dt(const ExperimentConfig& c, const ResolvedExperiment& r, const PhaseGrid& grid) {
  if (c.phase.dt) return *c.phase.dt;
  if (c.phase.scheme == FpScheme::spectral) return r.scales.tau_H / 100.0;
  FokkerPlanckSolver probe(grid, r.model, r.diffusion, c.phase.scheme);
  return 0.9 * probe.max_stable_dt();
}

double mixture_dt(const ExperimentConfig& c, const ResolvedExperiment& r) {
  return c.mixture.dt ? *c.mixture.dt : r.scales.tau_H / 200.0;
}

double max_squeeze(const MixtureEnsemble& ens) {
  double s = 1.0;
  for (const auto& p : ens.particles) s = std::max(s, squeeze_ratio(p.state.cov, ens.scales.sigma_star));
  return s;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

const char* kComparisonPlot = R"py(import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "comparison.csv"
rows = list(csv.DictReader(open(path)))
t = [float(r["t_over_tau"]) for r in rows]
fig, ax = plt.subplots(figsize=(6, 4))
ax.plot(t, [float(r["trace_distance"]) for r in rows], "o-", label="trace distance")
ax.plot(t, [float(r["l1_distance"]) for r in rows], "s-", label="L1 distance")
ax.plot(t, [float(r["epsilon"]) for r in rows], "k--", label="epsilon(t)")
ax.plot(t, [float(r["bound"]) for r in rows], "k:", label="pass line")
ax.set_xlabel("t / tau_H")
ax.set_ylabel("distance")
ax.set_yscale("symlog", linthresh=1e-6)
ax.legend()
fig.tight_layout()
fig.savefig(path.rsplit(".", 1)[0] + ".png", dpi=150)
)py";

const char* kBreakdownPlot = R"py(import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "breakdown.csv"
rows = list(csv.DictReader(open(path)))
t = [float(r["t_over_tau"]) for r in rows]
fig, ax = plt.subplots(figsize=(6, 4))
ax.plot(t, [float(r["min_ratio_closed"]) for r in rows], "o-", label="no diffusion")
ax.plot(t, [float(r["min_ratio_open"]) for r in rows], "s-", label="with diffusion")
ax.axhline(-0.1, color="k", ls=":")
ax.axhline(-0.01, color="k", ls="--")
ax.set_xlabel("t / tau_H")
ax.set_ylabel("min W / max W")
ax.legend()
fig.tight_layout()
fig.savefig(path.rsplit(".", 1)[0] + ".png", dpi=150)
)py";

}  // namespace

bool ComparisonReport::passed() const {
  return std::all_of(rows.begin(), rows.end(), [](const ComparisonRow& r) { return r.pass_trace && r.pass_l1; });
}

std::string ComparisonReport::summary() const {
  std::ostringstream o;
  double worst_trace = 0.0, worst_l1 = 0.0, squeeze = 1.0;
  for (const auto& r : rows) {
    worst_trace = std::max(worst_trace, r.trace_distance);
    worst_l1 = std::max(worst_l1, r.l1_distance);
    squeeze = std::max(squeeze, r.max_squeeze);
  }
  o << "tau_H = " << csv_number(scales.tau_H) << '\n'
    << "hbar_over_s = " << csv_number(scales.hbar_over_s()) << '\n'
    << "D0 = " << csv_number(scales.D0) << '\n'
    << "z = " << csv_number(z) << '\n'
    << "bound_applicable = " << (bound_applicable ? "true" : "false") << '\n'
    << "T = " << csv_number(T) << '\n'
    << "margin = " << csv_number(margin) << '\n'
    << "abs_tol = " << csv_number(abs_tol) << '\n'
    << "snapshots = " << rows.size() << '\n'
    << "particles = " << particles << '\n'
    << "quantum_dt = " << csv_number(quantum_dt) << '\n'
    << "classical_dt = " << csv_number(classical_dt) << '\n'
    << "mixture_dt = " << csv_number(mixture_dt) << '\n'
    << "max_trace_distance = " << csv_number(worst_trace) << '\n'
    << "max_l1_distance = " << csv_number(worst_l1) << '\n'
    << "max_squeeze = " << csv_number(squeeze) << '\n'
    << "final_trace = " << csv_number(final_trace) << '\n'
    << "final_mass = " << csv_number(final_mass) << '\n'
    << "classical_leak = " << csv_number(classical_leak) << '\n'
    << "max_defect_after = " << csv_number(diagnostics.max_defect_after) << '\n'
    << "max_nts_excess = " << csv_number(diagnostics.max_nts_excess) << '\n'
    << "projections = " << diagnostics.projections << '\n'
    << "collapses = " << diagnostics.collapses << '\n'
    << "domain_exits = " << diagnostics.domain_exits << '\n'
    << "result = " << (passed() ? "pass" : "fail") << '\n';
  return o.str();
}

ComparisonReport run_comparison(const ExperimentConfig& config) {
  const ResolvedExperiment r = resolve(config);
  require_one_dimension(r, "compare");
  if (!r.scales.z && !config.run.z_cap) {
    throw BoundNotApplicable("compare: no diffusion, so the squeeze bound z is unbounded and the error budget does "
                             "not apply; add diffusion or set z_cap");
  }
  const int snaps = config.run.snapshots;

  ComparisonReport rep;
  rep.scales = r.scales;
  rep.T = r.T;
  rep.margin = config.run.margin;
  rep.abs_tol = config.run.abs_tol;

  const QuantumGrid qgrid = quantum_grid(config);
  const PhaseGrid pgrid = phase_grid(config);
  const Sampling sampling = sampling_for(config.phase.scheme);

  rep.quantum_dt = quantum_dt(config, r, qgrid);
  rep.classical_dt = classical_dt(config, r, pgrid);
  rep.mixture_dt = mixture_dt(config, r);

  LindbladOptions lopt;
  lopt.snapshots = snaps;
  lopt.check_positivity = config.quantum.check_positivity;
  lopt.edge_tol = config.quantum.edge_tol;
  lopt.method = config.quantum.method;
  std::vector<DensityMatrixGrid> rho;
  try {
    rho = evolve_lindblad(initial_density(r, qgrid), r.model, r.diffusion, r.T, rep.quantum_dt, lopt);
  } catch (const SolverAbort& e) {
    throw e.in_context("quantum run: ");
  }

  FokkerPlanckOptions fopt;
  fopt.scheme = config.phase.scheme;
  fopt.snapshots = snaps;
  fopt.leak_tol = config.phase.leak_tol;
  std::vector<PhaseField> f;
  try {
    f = evolve_fokker_planck(initial_field(r, pgrid, sampling), r.model, r.diffusion, r.T, rep.classical_dt, fopt);
  } catch (const SolverAbort& e) {
    throw e.in_context("classical run: ");
  }

  MixtureSettings mset;
  mset.kick = config.mixture.kick;
  mset.collapse_cap = config.mixture.collapse_cap;
  const MixtureEnsemble ens0 = make_ensemble(r.components, config.mixture.particles, r.scales, config.run.z_cap,
                                             config.run.seed);
  rep.z = ens0.z;
  rep.bound_applicable = ens0.bound_applicable;
  rep.particles = static_cast<long>(ens0.particles.size());
  std::vector<MixtureEnsemble> mix;
  try {
    mix = evolve_mixture(ens0, r.model, r.diffusion, r.T, rep.mixture_dt, mset, snaps);
  } catch (const SolverAbort& e) {
    throw e.in_context("mixture run: ");
  }

  if (rho.size() != mix.size() || f.size() != mix.size()) {
    throw std::logic_error("compare: snapshot counts differ between the three runs");
  }
  for (std::size_t k = 0; k < mix.size(); ++k) {
    ComparisonRow row;
    row.t = r.T * static_cast<double>(k) / snaps;
    const DensityMatrixGrid approx = mixture_to_density_grid(mix[k], qgrid, r.model.mass, config.quantum.edge_tol);
    row.trace_distance = trace_distance(approx, rho[k]);
    const int cf = config.phase.coarsen;
    row.l1_distance = l1_distance(coarsen(mixture_to_phase_field(mix[k], pgrid, sampling, config.phase.leak_tol), cf, cf),
                                  coarsen(f[k], cf, cf));
    row.epsilon = theorem_epsilon(r.scales, row.t, 1, config.run.z_cap);
    row.max_squeeze = max_squeeze(mix[k]);
    const double bound = row.epsilon * (1.0 + rep.margin) + rep.abs_tol;
    row.pass_trace = row.trace_distance <= bound;
    row.pass_l1 = row.l1_distance <= bound;
    rep.rows.push_back(row);
  }
  rep.diagnostics = mix.back().diagnostics;
  rep.final_trace = rho.back().trace();
  rep.final_mass = f.back().total_mass();
  rep.classical_leak = 1.0 - rep.final_mass;
  return rep;
}

double BreakdownReport::worst_closed(double from) const {
  double w = 0.0;
  for (const auto& r : rows) {
    if (r.t >= from) w = std::min(w, r.min_ratio_closed);
  }
  return w;
}

double BreakdownReport::worst_open(double from) const {
  double w = 0.0;
  for (const auto& r : rows) {
    if (r.t >= from) w = std::min(w, r.min_ratio_open);
  }
  return w;
}

std::string BreakdownReport::summary() const {
  std::ostringstream o;
  o << "tau_H = " << csv_number(scales.tau_H) << '\n'
    << "hbar_over_s = " << csv_number(scales.hbar_over_s()) << '\n'
    << "D0 = " << csv_number(scales.D0) << '\n'
    << "threshold_D0 = " << (threshold_d0 ? csv_number(*threshold_d0) : std::string("none")) << '\n'
    << "T = " << csv_number(T) << '\n'
    << "ehrenfest_time = " << (ehrenfest_time ? csv_number(*ehrenfest_time) : std::string("unknown")) << '\n'
    << "worst_ratio_closed = " << csv_number(worst_closed()) << '\n'
    << "worst_ratio_open = " << csv_number(worst_open()) << '\n';
  if (ehrenfest_time) o << "worst_ratio_closed_after_ehrenfest = " << csv_number(worst_closed(*ehrenfest_time)) << '\n';
  return o.str();
}

BreakdownReport run_breakdown_demo(const ExperimentConfig& config) {
  const ResolvedExperiment r = resolve(config);
  require_one_dimension(r, "breakdown-demo");
  if (r.diffusion.position == 0.0 && r.diffusion.momentum == 0.0) {
    throw std::invalid_argument("breakdown-demo: configure a non-zero diffusion for the comparison run");
  }
  BreakdownReport rep;
  rep.scales = r.scales;
  rep.T = r.T;
  if (r.scales.lyapunov && r.scales.s_H && *r.scales.s_H > r.scales.hbar) {
    rep.ehrenfest_time = ehrenfest_time(*r.scales.lyapunov, *r.scales.s_H, r.scales.hbar);
  }
  if (r.T > 0.0 && r.scales.s_H) {
    try {
      rep.threshold_d0 = diffusion_threshold(r.scales, 1.0, r.T, 1);
    } catch (const BelowFloorError& e) {
      rep.threshold_d0 = diffusion_threshold(r.scales, e.floor(), r.T, 1);  // = hbar/s_H, where z reaches 1
    }
  }

  const QuantumGrid grid = quantum_grid(config);
  const DensityMatrixGrid rho0 = initial_density(r, grid);
  LindbladOptions opt;
  opt.snapshots = config.run.snapshots;
  opt.check_positivity = config.quantum.check_positivity;
  opt.edge_tol = config.quantum.edge_tol;
  opt.method = config.quantum.method;

  struct Negativity {
    double ratio, volume;
  };
  auto negativity = [](const DensityMatrixGrid& s) {
    const PhaseField w = wigner_transform_grid(s);
    const double area = w.grid.cell_area();
    const double volume = -w.values.cwiseMin(0.0).sum() * area;
    return Negativity{w.min_value() / w.max_value(), volume};
  };
  auto run = [&](const DiffusionSpec& d, const char* label) {
    std::vector<Negativity> out;
    double dt = r.scales.tau_H / 100.0;
    if (config.quantum.dt) {
      dt = *config.quantum.dt;
    } else if (config.quantum.method == LindbladMethod::rk4) {
      dt = 0.9 * LindbladSolver(grid, r.model, d).max_stable_dt();
    }
    try {
      evolve_lindblad(rho0, r.model, d, r.T, dt, opt, [&](const DensityMatrixGrid& s) { out.push_back(negativity(s)); });
    } catch (const SolverAbort& e) {
      throw e.in_context(label);
    }
    return out;
  };
  const auto closed = run(DiffusionSpec{0.0, 0.0, r.diffusion.hbar}, "run without diffusion: ");
  const auto open = run(r.diffusion, "run with diffusion: ");
  for (std::size_t k = 0; k < closed.size(); ++k) {
    BreakdownRow row;
    row.t = r.T * static_cast<double>(k) / config.run.snapshots;
    row.min_ratio_closed = closed[k].ratio;
    row.min_ratio_open = open[k].ratio;
    row.negative_volume_closed = closed[k].volume;
    row.negative_volume_open = open[k].volume;
    rep.rows.push_back(row);
  }
  return rep;
}

void emit_plots(const ComparisonReport& report, const std::string& dir) {
  const std::filesystem::path root(dir);
  std::filesystem::create_directories(root);
  std::ostringstream csv;
  csv << "t,t_over_tau,trace_distance,l1_distance,epsilon,bound,max_squeeze,pass_trace,pass_l1\n";
  for (const auto& r : report.rows) {
    csv << csv_number(r.t) << ',' << csv_number(r.t / report.scales.tau_H) << ',' << csv_number(r.trace_distance)
        << ',' << csv_number(r.l1_distance) << ',' << csv_number(r.epsilon) << ','
        << csv_number(r.epsilon * (1.0 + report.margin) + report.abs_tol) << ',' << csv_number(r.max_squeeze) << ','
        << (r.pass_trace ? 1 : 0) << ',' << (r.pass_l1 ? 1 : 0) << '\n';
  }
  write_file(root / "comparison.csv", csv.str());
  write_file(root / "plot_comparison.py", kComparisonPlot);
  write_file(root / "summary.txt", report.summary());
}

void emit_plots(const BreakdownReport& report, const std::string& dir) {
  const std::filesystem::path root(dir);
  std::filesystem::create_directories(root);
  std::ostringstream csv;
  csv << "t,t_over_tau,min_ratio_closed,min_ratio_open,negative_volume_closed,negative_volume_open\n";
  for (const auto& r : report.rows) {
    csv << csv_number(r.t) << ',' << csv_number(r.t / report.scales.tau_H) << ',' << csv_number(r.min_ratio_closed)
        << ',' << csv_number(r.min_ratio_open) << ',' << csv_number(r.negative_volume_closed) << ','
        << csv_number(r.negative_volume_open) << '\n';
  }
  write_file(root / "breakdown.csv", csv.str());
  write_file(root / "plot_breakdown.py", kBreakdownPlot);
  write_file(root / "summary.txt", report.summary());
}

}  // namespace qcc
