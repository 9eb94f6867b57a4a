// Command-line front end: one subcommand per experiment stage.

#include "CLI11.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "qcc/config.hpp"
#include "qcc/fokker_planck.hpp"
#include "qcc/harmonic_error.hpp"
#include "qcc/harness.hpp"
#include "qcc/langevin.hpp"
#include "qcc/lindblad.hpp"
#include "qcc/mixture.hpp"
#include "qcc/scales.hpp"

namespace fs = std::filesystem;
using namespace qcc;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<double> margin;
  bool effective_diffusion = false;
  std::optional<double> z_cap;
};

ExperimentConfig load(const Overrides& o) {
  ExperimentConfig c = load_config(o.config);
  if (o.seed) c.run.seed = *o.seed;
  if (o.out) c.run.out = *o.out;
  if (o.margin) c.run.margin = *o.margin;
  if (o.effective_diffusion) c.run.effective_diffusion = true;
  if (o.z_cap) c.run.z_cap = *o.z_cap;
  return c;
}

fs::path out_dir(const ExperimentConfig& c) {
  fs::create_directories(c.run.out);
  return c.run.out;
}

std::string opt_number(const std::optional<double>& v) { return v ? csv_number(*v) : "inf"; }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void require_1d(const ResolvedExperiment& r, const char* what) {
  if (r.model.dims != 1) throw std::invalid_argument(std::string(what) + " requires dims = 1");
  if (r.components.empty()) throw std::invalid_argument(std::string(what) + " requires an [initial] section");
}

DensityMatrixGrid initial_density(const ResolvedExperiment& r, const QuantumGrid& grid) {
  double total = 0.0;
  for (const auto& c : r.components) total += c.first;
  DensityMatrixGrid rho = gaussian_to_grid(r.components.front().second, grid, r.model.mass);
  rho.rho *= r.components.front().first / total;
  for (std::size_t i = 1; i < r.components.size(); ++i) {
    rho.rho += (r.components[i].first / total) * gaussian_to_grid(r.components[i].second, grid, r.model.mass).rho;
  }
  return rho;
}

int cmd_scales(const ExperimentConfig& c) {
  const ResolvedExperiment r = resolve(c);
  const ScaleReport& s = r.scales;
  std::ostringstream csv;
  csv << "tau_H,a_H,s_H,x_H,p_H,D0,z,epsilon_T\n";
  std::string eps = "nan";
  if (s.z || c.run.z_cap) eps = csv_number(theorem_epsilon(s, r.T, r.model.dims, c.run.z_cap));
  csv << csv_number(s.tau_H) << ',' << csv_number(s.a_H) << ',' << opt_number(s.s_H) << ',' << opt_number(s.x_H)
      << ',' << opt_number(s.p_H) << ',' << csv_number(s.D0) << ',' << opt_number(s.z) << ',' << eps << '\n';
  write_text(out_dir(c) / "scales.csv", csv.str());
  std::cout << csv.str();
  return 0;
}

int cmd_evolve_quantum(const ExperimentConfig& c) {
  const ResolvedExperiment r = resolve(c);
  require_1d(r, "evolve-quantum");
  const QuantumGrid grid{c.quantum.n, c.quantum.x_min, c.quantum.x_max};
  grid.validate();
  double dt = r.scales.tau_H / 100.0;
  if (c.quantum.dt) {
    dt = *c.quantum.dt;
  } else if (c.quantum.method == LindbladMethod::rk4) {
    dt = 0.9 * LindbladSolver(grid, r.model, r.diffusion).max_stable_dt();
  }
  LindbladOptions opt{c.run.snapshots, c.quantum.check_positivity, c.quantum.edge_tol, c.quantum.method};
  const fs::path dir = out_dir(c);
  std::ostringstream csv;
  csv << "t,trace,purity,mean_x,mean_p,var_x,var_p,cov_xp\n";
  int k = 0;
  evolve_lindblad(initial_density(r, grid), r.model, r.diffusion, r.T, dt, opt, [&](const DensityMatrixGrid& s) {
    const GridMoments m = s.moments();
    csv << csv_number(s.t) << ',' << csv_number(s.trace()) << ',' << csv_number(s.purity()) << ','
        << csv_number(m.mean_x) << ',' << csv_number(m.mean_p) << ',' << csv_number(m.var_x) << ','
        << csv_number(m.var_p) << ',' << csv_number(m.cov_xp) << '\n';
    write_snapshot(s, (dir / ("rho_" + std::to_string(k++) + ".qcc")).string());
  });
  write_text(dir / "quantum_moments.csv", csv.str());
  return 0;
}

int cmd_evolve_classical(const ExperimentConfig& c) {
  const ResolvedExperiment r = resolve(c);
  require_1d(r, "evolve-classical");
  const PhaseGrid grid{c.phase.nx, c.phase.np, c.phase.x_min, c.phase.x_max, c.phase.p_min, c.phase.p_max};
  grid.validate();
  const Sampling sampling = c.phase.scheme == FpScheme::spectral ? Sampling::point : Sampling::cell_average;
  PhaseField f0(grid);
  double total = 0.0;
  for (const auto& comp : r.components) total += comp.first;
  for (const auto& [w, s] : r.components) add_gaussian(f0, w / total, s.mean, s.cov, sampling);
  double dt = r.scales.tau_H / 100.0;
  if (c.phase.dt) {
    dt = *c.phase.dt;
  } else if (c.phase.scheme == FpScheme::finite_volume) {
    dt = 0.9 * FokkerPlanckSolver(grid, r.model, r.diffusion, c.phase.scheme).max_stable_dt();
  }
  FokkerPlanckOptions opt{c.phase.scheme, c.run.snapshots, c.phase.leak_tol};
  const fs::path dir = out_dir(c);
  std::ostringstream csv;
  csv << "t,mass,min_value\n";
  int k = 0;
  evolve_fokker_planck(f0, r.model, r.diffusion, r.T, dt, opt, [&](const PhaseField& f, double t) {
    csv << csv_number(t) << ',' << csv_number(f.total_mass()) << ',' << csv_number(f.min_value()) << '\n';
    write_csv(f, (dir / ("field_" + std::to_string(k++) + ".csv")).string());
  });
  write_text(dir / "classical_mass.csv", csv.str());
  return 0;
}

int cmd_evolve_langevin(const ExperimentConfig& c) {
  const ResolvedExperiment r = resolve(c);
  if (r.components.size() != 1) throw std::invalid_argument("evolve-langevin takes exactly one [initial] section");
  const auto& s = r.components.front().second;
  const double dt = c.langevin.dt ? *c.langevin.dt : r.scales.tau_H / 100.0;
  LangevinEnsemble ens = sample_gaussian_ensemble(c.langevin.samples, s.mean, s.cov, c.run.seed);
  ens = evolve_langevin_ensemble(ens, r.model, r.diffusion, r.T, dt);
  const fs::path dir = out_dir(c);
  write_ensemble(ens, (dir / "langevin.ens").string());
  std::ostringstream o;
  o << "samples = " << ens.samples.rows() << "\nsteps = " << ens.steps_taken << "\nt = " << csv_number(ens.t) << '\n';
  const Vec mean = ens.mean();
  for (Eigen::Index i = 0; i < mean.size(); ++i) o << "mean_" << i << " = " << csv_number(mean[i]) << '\n';
  write_text(dir / "langevin_summary.txt", o.str());
  std::cout << o.str();
  return 0;
}

int cmd_evolve_mixture(const ExperimentConfig& c) {
  const ResolvedExperiment r = resolve(c);
  MixtureSettings set;
  set.kick = c.mixture.kick;
  set.collapse_cap = c.mixture.collapse_cap;
  const MixtureEnsemble ens0 = make_ensemble(r.components, c.mixture.particles, r.scales, c.run.z_cap, c.run.seed);
  const double dt = c.mixture.dt ? *c.mixture.dt : r.scales.tau_H / 200.0;
  const fs::path dir = out_dir(c);
  int k = 0;
  MixtureEnsemble last;
  evolve_mixture(ens0, r.model, r.diffusion, r.T, dt, set, c.run.snapshots, [&](const MixtureEnsemble& e) {
    write_ensemble_csv(e, (dir / ("mixture_" + std::to_string(k++) + ".csv")).string());
    last = e;
  });
  write_text(dir / "mixture_summary.txt", summary(last));
  std::cout << summary(last);
  return 0;
}

int cmd_harmonic_error(const ExperimentConfig& c, int n) {
  const ResolvedExperiment r = resolve(c);
  require_1d(r, "harmonic-error");
  std::vector<HarmonicErrorReport> rows;
  for (const auto& [w, s] : r.components) rows.push_back(harmonic_error_report(s.mean, s.cov, r.model, s.hbar, n));
  const fs::path dir = out_dir(c);
  write_harmonic_error_csv(rows, (dir / "harmonic_error.csv").string());
  for (const auto& h : rows) {
    std::cout << "quantum " << csv_number(h.numeric_quantum) << " <= " << csv_number(h.bound_quantum)
              << "   classical " << csv_number(h.numeric_classical) << " <= " << csv_number(h.bound_classical) << '\n';
  }
  return 0;
}

int cmd_compare(const ExperimentConfig& c) {
  const ComparisonReport rep = run_comparison(c);
  emit_plots(rep, c.run.out);
  std::cout << rep.summary();
  return rep.passed() ? 0 : 1;
}

int cmd_breakdown(const ExperimentConfig& c) {
  const BreakdownReport rep = run_breakdown_demo(c);
  emit_plots(rep, c.run.out);
  std::cout << rep.summary();
  return 0;
}

struct PhysicalArgs {
  double mass = 1e-11;        // kg
  double velocity = 1.0;      // m/s
  double length = 1.0;        // m
  double rate = 1e25;         // m^-2 s^-1
  double lyapunov = 1.0;      // 1/s
  double action = 1.0;        // kg m^2/s
};

int cmd_physical(const PhysicalArgs& a) {
  constexpr double year = 3.15576e7;
  const double t = physical_example_time(a.mass, a.velocity, a.length, a.rate);
  const double te = ehrenfest_time(a.lyapunov, a.action, kHbarSI);
  const double th = correspondence_horizon(a.lyapunov, a.action, kHbarSI);
  std::cout << "bound_time_s = " << csv_number(t) << "\nbound_time_years = " << csv_number(t / year)
            << "\nlog10_bound_time_s = " << csv_number(std::log10(t)) << "\nehrenfest_time_s = " << csv_number(te)
            << "\ncorrespondence_horizon_s = " << csv_number(th) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-classical correspondence experiments"};
  app.require_subcommand(1);
  Overrides o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Experiment configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "Random seed");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--margin", o.margin, "Relative pass margin")->check(CLI::NonNegativeNumber);
    sub->add_flag("--effective-diffusion", o.effective_diffusion, "Replace D_x by D_p / (m sup|V''|)");
    sub->add_option("--z-cap", o.z_cap, "Squeeze cap used when z is unbounded")->check(CLI::Range(1.0, 1e300));
  };

  int n_harmonic = 512;
  PhysicalArgs phys;
  std::vector<std::pair<CLI::App*, std::function<int(const ExperimentConfig&)>>> subs;
  auto config_sub = [&](const char* name, const char* help, std::function<int(const ExperimentConfig&)> fn) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub);
    subs.emplace_back(sub, std::move(fn));
    return sub;
  };
  config_sub("scales", "Characteristic scales and the error budget (scales.csv)", cmd_scales);
  config_sub("evolve-quantum", "Lindblad evolution on the position grid", cmd_evolve_quantum);
  config_sub("evolve-classical", "Fokker-Planck evolution on the phase grid", cmd_evolve_classical);
  config_sub("evolve-langevin", "Langevin ensemble", cmd_evolve_langevin);
  config_sub("evolve-mixture", "Gaussian-mixture trajectory", cmd_evolve_mixture);
  config_sub("harmonic-error", "Quadratic-expansion error against its bounds",
             [&](const ExperimentConfig& c) { return cmd_harmonic_error(c, n_harmonic); })
      ->add_option("--points", n_harmonic, "Grid points per axis")
      ->check(CLI::Range(16, 8192));
  config_sub("compare", "Quantum, classical and mixture runs side by side", cmd_compare);
  config_sub("breakdown-demo", "Wigner negativity with and without diffusion", cmd_breakdown);

  CLI::App* physical = app.add_subcommand("physical-example", "Bound time for a decohered macroscopic particle");
  physical->add_option("--mass", phys.mass, "kg")->check(CLI::PositiveNumber);
  physical->add_option("--velocity", phys.velocity, "m/s")->check(CLI::PositiveNumber);
  physical->add_option("--length", phys.length, "Length scale of the potential, m")->check(CLI::PositiveNumber);
  physical->add_option("--localization-rate", phys.rate, "m^-2 s^-1")->check(CLI::PositiveNumber);
  physical->add_option("--lyapunov", phys.lyapunov, "1/s")->check(CLI::PositiveNumber);
  physical->add_option("--action", phys.action, "kg m^2/s")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);
  try {
    if (physical->parsed()) return cmd_physical(phys);
    for (const auto& [sub, fn] : subs) {
      if (sub->parsed()) return fn(load(o));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
