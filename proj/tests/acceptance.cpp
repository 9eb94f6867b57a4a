// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qcc/config.hpp"
#include "qcc/fokker_planck.hpp"
#include "qcc/gaussian.hpp"
#include "qcc/harmonic_error.hpp"
#include "qcc/harness.hpp"
#include "qcc/langevin.hpp"
#include "qcc/lindblad.hpp"
#include "qcc/mixture.hpp"
#include "qcc/scales.hpp"

using namespace qcc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string config_path(const std::string& name) { return std::string(QCC_SOURCE_DIR) + "/configs/" + name; }

void require(bool ok, const std::string& what) {
  if (!ok) throw std::runtime_error("setup mismatch: " + what);
}

Vec random_vec(int n, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

Mat random_sym(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  return 0.5 * (a + a.transpose());
}

Mat random_spd(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  return a * a.transpose() / n + 0.2 * Mat::Identity(n, n);
}

// A random anharmonic built-in on a box around the origin.
HamiltonianModel random_anharmonic(std::mt19937_64& rng, int dims) {
  std::uniform_real_distribution<double> u(0.5, 2.0);
  const double mass = u(rng);
  switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
    case 0:
      return make_model(mass, Potential::double_well(u(rng), u(rng)), dims, -2.5, 2.5);
    case 1:
      return make_model(mass, Potential::cosine(u(rng), u(rng)), dims, -3.0, 3.0);
    default:
      return make_model(mass, Potential::cubic(u(rng), 0.2 * u(rng)), dims, -2.0, 2.0);
  }
}

// Diffusion with whitened rate k, so that z = max(1/(k tau_H), 1).
DiffusionSpec diffusion_with_rate(const HamiltonianModel& m, double hbar, double k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> extra(1.0, 3.0);
  const double a = std::sqrt(m.mass * m.sup2);
  DiffusionSpec d{k * hbar / a, k * hbar * a, hbar};
  // One channel sits exactly at the rate, the other above it.
  if (std::bernoulli_distribution(0.5)(rng)) {
    d.position *= extra(rng);
  } else {
    d.momentum *= extra(rng);
  }
  return d;
}

Outcome harmonic_oracle() {
  auto c = load_config(config_path("harmonic.ini"));
  require(c.model.potential == PotentialKind::harmonic && c.model.params == std::vector<double>{1.0}, "V = x^2/2");
  require(c.model.mass == 1.0 && c.diffusion.hbar == 1.0, "m = hbar = 1");
  require(c.diffusion.position == 0.05 && c.diffusion.momentum == 0.05, "D_x = D_p = 0.05");
  require(c.quantum.n == 256 && c.run.T_over_tau == 10.0, "N = 256, T = 10 tau_H");
  require(c.initial.size() == 1 && c.initial[0].covariance.empty(), "coherent initial state");
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run_comparison(c);
  const double secs = seconds_since(t0);
  double tr = 0.0, l1 = 0.0;
  for (const auto& row : r.rows) {
    tr = std::max(tr, row.trace_distance);
    l1 = std::max(l1, row.l1_distance);
  }
  return {tr < 1e-3 && l1 < 1e-3 && secs < 120.0,
          "max trace " + fmt("%.2e", tr) + ", max L1 " + fmt("%.2e", l1) + ", " + fmt("%.0f", secs) + " s"};
}

Outcome theorem_bound() {
  auto c = load_config(config_path("double_well.ini"));
  require(c.model.potential == PotentialKind::double_well && c.model.lo == -3 && c.model.hi == 3, "double well on |x|<=3");
  require(c.model.mass == 1.0 && c.diffusion.hbar_over_s == 1e-3, "m = 1, hbar/s_H = 1e-3");
  require(c.quantum.n == 512 && c.phase.nx / c.phase.coarsen == 128 && c.phase.np / c.phase.coarsen == 128,
          "N = 512, distances on 128 x 128");
  require(c.mixture.particles == 1000 && c.run.T_over_tau == 5.0, "M = 1000, T = 5 tau_H");
  const auto base = resolve(c).scales;
  c.diffusion.d0 = 3.0 * diffusion_threshold(base, 0.3, 5.0 * base.tau_H, 1);
  c.run.margin = 0.10;
  c.run.abs_tol = 1e-8;

  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run_comparison(c);
  const double secs = seconds_since(t0);
  double worst = 0.0;
  bool ok = true;
  for (const auto& row : r.rows) {
    const double cap = row.epsilon * 1.10 + 1e-8;
    ok = ok && row.trace_distance <= cap && row.l1_distance <= cap;
    if (row.epsilon > 0.0) worst = std::max({worst, row.trace_distance / row.epsilon, row.l1_distance / row.epsilon});
  }
  return {ok && secs < 1800.0, "D0 = " + fmt("%.4e", *c.diffusion.d0) + ", worst distance/epsilon " + fmt("%.3f", worst) +
                                   " over " + std::to_string(r.rows.size()) + " snapshots, " + fmt("%.0f", secs) + " s"};
}

Outcome nts_suite() {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_out = 0.0, worst_defect = 0.0;
  long checks = 0;
  for (int run = 0; run < 1000; ++run) {
    const int dims = 1 + static_cast<int>(u(rng) * 2.0);
    const auto model = random_anharmonic(rng, dims);
    const double hbar = 0.02 + 0.2 * u(rng);
    const double tau = std::sqrt(model.mass / model.sup2);
    DiffusionSpec diffusion;
    Mat sig;
    if (run % 2 == 0) {
      diffusion = diffusion_with_rate(model, hbar, (0.05 + 0.95 * u(rng)) / tau, rng);
      sig = random_pure_nts_covariance(compute_scales(model, diffusion).sigma_star, *compute_scales(model, diffusion).z,
                                       rng, 0.8);
    } else {
      // Start on the edge of the window.
      const auto base = compute_scales(model, {0.0, 0.0, hbar});
      sig = random_pure_nts_covariance(base.sigma_star, 20.0, rng, 0.8);
      const double ratio = std::max(squeeze_ratio(sig, base.sigma_star), 1.0 + 1e-3);
      diffusion = diffusion_with_rate(model, hbar, 1.0 / (ratio * tau), rng);
    }
    const auto scales = compute_scales(model, diffusion);
    if (!(scales.D0 > 0.0)) throw std::runtime_error("random run has D0 = 0");
    const double z = *scales.z;
    Vec alpha(2 * dims);
    alpha.head(dims) = random_vec(dims, rng, 0.5 * model.lo, 0.5 * model.hi);
    alpha.tail(dims) = random_vec(dims, rng, -1.0, 1.0) * scales.a_H * 0.3;
    MixtureSettings settings;
    settings.kick = u(rng) < 0.5 ? KickMode::stochastic : KickMode::cloud;
    const auto ens = make_ensemble({{1.0, {alpha, sig, hbar}}}, 3, scales, std::nullopt, 1000 + run);
    const int steps = 100;
    evolve_mixture(ens, model, diffusion, scales.tau_H, scales.tau_H / steps, settings, steps,
                   [&](const MixtureEnsemble& e) {
                     for (const auto& p : e.particles) {
                       const Vec lam = whitened_spectrum(p.state.cov, scales.sigma_star);
                       worst_out = std::max({worst_out, lam.maxCoeff() - z, 1.0 / z - lam.minCoeff()});
                       worst_defect = std::max(worst_defect, symplectic_defect(p.state.cov, hbar));
                       ++checks;
                     }
                   });
  }
  return {worst_out <= 1e-6 && worst_defect < 1e-8,
          std::to_string(checks) + " particle states, worst window excess " + fmt("%.2e", std::max(worst_out, 0.0)) +
              ", worst defect " + fmt("%.2e", worst_defect)};
}

Outcome splitting_identities() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double e_sum = 0.0, e_tan = 0.0, min_sd = 1e300;
  int edge_cases = 0;
  for (int i = 0; i < 10000; ++i) {
    const int dims = 1 + static_cast<int>(u(rng) * 3.0);
    const auto model = random_anharmonic(rng, dims);
    const double hbar = 0.1 + 0.9 * u(rng);
    const double tau = std::sqrt(model.mass / model.sup2);
    DiffusionSpec diffusion;
    ScaleReport scales;
    Mat sig;
    if (i % 2 == 0) {
      diffusion = diffusion_with_rate(model, hbar, (0.05 + 0.95 * u(rng)) / tau, rng);
      scales = compute_scales(model, diffusion);
      sig = random_pure_nts_covariance(scales.sigma_star, *scales.z, rng, 0.8);
    } else {
      // On the edge of the window: z is set to the squeeze ratio of sigma.
      const auto base = compute_scales(model, {0.0, 0.0, hbar});
      sig = random_pure_nts_covariance(base.sigma_star, 20.0, rng, 0.8);
      const double ratio = std::max(squeeze_ratio(sig, base.sigma_star), 1.0 + 1e-3);
      diffusion = diffusion_with_rate(model, hbar, 1.0 / (ratio * tau), rng);
      scales = compute_scales(model, diffusion);
      ++edge_cases;
    }
    const double z = *scales.z;
    Vec alpha = random_vec(2 * dims, rng, -1.0, 1.0);
    alpha.head(dims) *= model.hi;
    const auto sp = split_sdot(alpha, sig, model, diffusion, scales, z);
    const Mat F = hamiltonian_matrix(model, alpha);
    const Mat full = F * sig + sig * F.transpose() + diffusion.matrix(dims);
    // Errors relative to the size of the terms once they exceed unity.
    e_sum = std::max(e_sum, max_abs(sp.s_z + sp.s_d - full) / std::max(1.0, max_abs(full)));
    e_tan = std::max(e_tan, tangency_defect(sp.sigma_tilde, sp.s_z_tilde) / std::max(1.0, max_abs(sp.s_z_tilde)));
    min_sd = std::min(min_sd, min_eigenvalue(sp.s_d_tilde));
  }
  return {e_sum <= 1e-10 && e_tan <= 1e-10 && min_sd >= -1e-9,
          std::to_string(edge_cases) + " of 10000 on the window edge, sum error " + fmt("%.1e", e_sum) + ", tangency " +
              fmt("%.1e", e_tan) + ", min eig S_D " + fmt("%.2e", min_sd)};
}

Outcome lemma_dominance() {
  std::mt19937_64 rng(5150);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_q = 0.0, worst_c = 0.0, best_q = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto model = random_anharmonic(rng, 1);
    const double hbar = 0.05 + 0.3 * u(rng);
    const auto scales = compute_scales(model, {0.0, 0.0, hbar});
    const double z = 1.0 + 4.0 * u(rng);
    const Mat sig = random_pure_nts_covariance(scales.sigma_star, z, rng, 0.8);
    Vec alpha(2);
    alpha << model.lo + (model.hi - model.lo) * (0.2 + 0.6 * u(rng)), (u(rng) - 0.5) * scales.a_H;
    const auto r = harmonic_error_report(alpha, sig, model, hbar, 512);
    worst_q = std::max(worst_q, r.ratio_quantum());
    worst_c = std::max(worst_c, r.ratio_classical());
    best_q = std::max(best_q, r.ratio_quantum());
  }
  return {worst_q <= 1.05 && worst_c <= 1.05,
          "max numeric/bound quantum " + fmt("%.3f", worst_q) + ", classical " + fmt("%.3f", worst_c)};
}

Outcome moment_formulas() {
  std::mt19937_64 rng(31337);
  const long samples = 1000000;
  double worst_z = 0.0;
  int fails = 0;
  for (int order = 1; order <= 3; ++order) {
    for (int c = 0; c < 20; ++c) {
      const int n = 2 * (1 + c % 2);
      const Mat cov = random_spd(n, rng);
      const Mat A = random_sym(n, rng), B = random_sym(n, rng), C = random_sym(n, rng);
      const double exact = order == 1   ? gaussian_moment(cov, A)
                           : order == 2 ? gaussian_moment4(cov, A, B)
                                        : gaussian_moment6(cov, A, B, C);
      const Mat L = cov.llt().matrixL();
      std::normal_distribution<double> g;
      double s1 = 0.0, s2 = 0.0;
      Vec w(n);
      for (long k = 0; k < samples; ++k) {
        for (int j = 0; j < n; ++j) w[j] = g(rng);
        const Vec b = L * w;
        double v = b.dot(A * b);
        if (order >= 2) v *= b.dot(B * b);
        if (order >= 3) v *= b.dot(C * b);
        s1 += v;
        s2 += v * v;
      }
      const double mean = s1 / samples;
      const double se = std::sqrt(std::max(s2 / samples - mean * mean, 0.0) / samples);
      const double zs = std::abs(mean - exact) / se;
      worst_z = std::max(worst_z, zs);
      if (zs > 3.0) ++fails;
    }
  }
  return {fails == 0, "60 inputs, worst deviation " + fmt("%.2f", worst_z) + " standard errors"};
}

Outcome eigen_pairs() {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  int mismatches = 0;
  const double hbar = 1.0;
  for (int i = 0; i < 1000; ++i) {
    const int dims = 1 + i % 3;
    const Mat s = random_symplectic(dims, rng, 0.3);
    const Mat star = (0.5 * hbar) * Mat::Identity(2 * dims, 2 * dims);
    const Mat cov = symmetrize(s * star * s.transpose());
    for (const auto& [lo, hi] : covariance_eigen_pairs(cov, hbar, 1e-10)) {
      worst = std::max(worst, std::abs(lo * hi / (0.25 * hbar * hbar) - 1.0));
    }
    const double ratio = squeeze_ratio(cov, star);
    for (double z : {1.0 + u(rng) * (ratio - 1.0), ratio * (1.0 + 1e-6), ratio * (1.0 + u(rng))}) {
      if (z < 1.0) continue;
      if (nts_upper(cov, star, z, 0.0) != nts_lower(cov, star, z, 0.0)) ++mismatches;
    }
  }
  return {worst <= 1e-10 && mismatches == 0,
          "worst pair product error " + fmt("%.1e", worst) + ", upper/lower mismatches " + std::to_string(mismatches)};
}

Outcome wigner_properties() {
  const QuantumGrid grid{256, -8, 8};
  const double hbar = 1.0;
  Mat cov(2, 2);
  cov << 0.7, 0.3, 0.3, (0.25 + 0.09) / 0.7;
  Vec mean(2);
  mean << 0.5, -0.4;
  const GaussianState st{mean, cov, hbar};
  const auto rho = gaussian_to_grid(st, grid, 1.0);
  const PhaseField w = wigner_transform_grid(rho);
  double worst = 0.0;
  for (int i = 0; i < w.grid.nx; ++i) {
    for (int j = 0; j < w.grid.np; ++j) {
      Vec pt(2);
      pt << w.grid.x(i), w.grid.p(j);
      worst = std::max(worst, std::abs(w.values(i, j) - gaussian_density(st, pt)));
    }
  }

  // Cat state: two separated coherent packets.
  DensityMatrixGrid cat{grid, hbar, 1.0, 0.0, CMat::Zero(grid.n, grid.n)};
  std::vector<std::complex<double>> psi(grid.n);
  double norm = 0.0;
  for (int i = 0; i < grid.n; ++i) {
    const double x = grid.x(i);
    psi[i] = std::exp(-(x - 2.5) * (x - 2.5) / 2.0) + std::exp(-(x + 2.5) * (x + 2.5) / 2.0) *
                                                          std::exp(std::complex<double>(0.0, 0.7 * x / hbar));
    norm += std::norm(psi[i]) * grid.dx();
  }
  for (int i = 0; i < grid.n; ++i)
    for (int j = 0; j < grid.n; ++j) cat.rho(i, j) = grid.dx() * psi[i] * std::conj(psi[j]) / norm;
  const PhaseField wc = wigner_transform_grid(cat);
  const double neg = wc.min_value() / wc.max_value();

  // Weyl trace for V(X) and P^2 on the cat state.
  auto pot = [](double x) { return 0.25 * x * x * x * x - x * x + 0.3 * x; };
  double tr_v = 0.0;
  for (int i = 0; i < grid.n; ++i) tr_v += cat.rho(i, i).real() * pot(grid.x(i));
  double w_v = 0.0, w_p2 = 0.0;
  for (int i = 0; i < wc.grid.nx; ++i) {
    for (int j = 0; j < wc.grid.np; ++j) {
      w_v += wc.values(i, j) * pot(wc.grid.x(i));
      w_p2 += wc.values(i, j) * wc.grid.p(j) * wc.grid.p(j);
    }
  }
  w_v *= wc.grid.cell_area();
  w_p2 *= wc.grid.cell_area();
  const auto m = cat.moments();
  const double tr_p2 = m.var_p + m.mean_p * m.mean_p;
  const double weyl = std::max(std::abs(tr_v - w_v), std::abs(tr_p2 - w_p2));
  return {worst <= 1e-4 && weyl <= 1e-6 && neg < -0.1,
          "Gaussian pointwise " + fmt("%.1e", worst) + ", Weyl trace " + fmt("%.1e", weyl) + ", cat min/max " +
              fmt("%.3f", neg)};
}

Outcome headline_numbers() {
  const double te = ehrenfest_time(1.0, 1.0, kHbarSI);
  const double horizon = correspondence_horizon(1.0, 1.0, kHbarSI);
  const double dust = physical_example_time(1e-11, 1.0, 1.0, 1e25);
  const bool ok = std::abs(te - 78.0) <= 1.0 && std::abs(te - std::log(1.0 / kHbarSI)) <= 1.0 &&
                  std::abs(std::log10(horizon) - 17.0) <= 0.5 && std::log10(dust) >= 13.5 && std::log10(dust) <= 15.5;
  return {ok, "Ehrenfest " + fmt("%.2f", te) + " s, horizon 10^" + fmt("%.2f", std::log10(horizon)) + " s, dust grain 10^" +
                  fmt("%.2f", std::log10(dust)) + " s"};
}

Outcome breakdown() {
  const auto c = load_config(config_path("breakdown.ini"));
  const auto r = run_breakdown_demo(c);
  if (!r.ehrenfest_time) throw std::runtime_error("breakdown config has no Lyapunov exponent");
  require(r.threshold_d0 && r.scales.D0 > *r.threshold_d0, "diffusion above threshold");
  require(r.T > *r.ehrenfest_time, "run extends past the Ehrenfest time");
  const double closed = r.worst_closed(*r.ehrenfest_time);
  const double open = r.worst_open(0.0);
  return {closed < -0.1 && open >= -0.01, "t_E = " + fmt("%.2f", *r.ehrenfest_time / r.scales.tau_H) +
                                              " tau_H, closed min W/max W after t_E " + fmt("%.3f", closed) +
                                              ", open run worst " + fmt("%.2e", open)};
}

Outcome langevin_vs_grid() {
  const auto c = load_config(config_path("double_well.ini"));
  const auto r = resolve(c);
  const double T = 3.0 * r.scales.tau_H;
  const auto& init = r.components.front().second;

  const PhaseGrid fine{512, 512, -3, 3, -6, 6};
  PhaseField f0(fine);
  add_gaussian(f0, 1.0, init.mean, init.cov, Sampling::point);
  FokkerPlanckOptions opt;
  opt.scheme = FpScheme::spectral;
  opt.snapshots = 1;
  const auto f = evolve_fokker_planck(f0, r.model, r.diffusion, T, r.scales.tau_H / 100, opt).back();
  const PhaseField grid64 = coarsen(f, 8, 8);

  const auto e0 = sample_gaussian_ensemble(1000000, init.mean, init.cov, 2024);
  const auto e = evolve_langevin_ensemble(e0, r.model, r.diffusion, T, r.scales.tau_H / 500);
  const PhaseField hist = histogram(e.samples, grid64.grid);
  const double d = l1_distance(hist, grid64);
  return {d <= 0.05, "L1 " + fmt("%.4f", d) + " on 64 x 64, histogram mass " + fmt("%.6f", hist.total_mass())};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"harmonic exactness oracle", harmonic_oracle},
      {"error bound end to end (double well)", theorem_bound},
      {"squeeze window and purity over 1000 runs", nts_suite},
      {"drift/broadening splitting identities", splitting_identities},
      {"harmonic approximation bound dominance", lemma_dominance},
      {"Gaussian quadratic-form moments", moment_formulas},
      {"eigenvalue pairing and squeeze equivalence", eigen_pairs},
      {"Wigner function properties", wigner_properties},
      {"headline time scales", headline_numbers},
      {"breakdown without diffusion", breakdown},
      {"Langevin ensemble vs grid Fokker-Planck", langevin_vs_grid},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << (i + 1) << ": " << criteria[i].first << " | "
              << o.detail << " [" << fmt("%.1f", seconds_since(t0)) << " s]" << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
