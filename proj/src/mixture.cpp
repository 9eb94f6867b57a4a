#include "qcc/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qcc {

std::string to_string(KickMode k) { return k == KickMode::cloud ? "cloud" : "stochastic"; }

KickMode kick_mode_from_string(const std::string& name) {
  if (name == "stochastic") return KickMode::stochastic;
  if (name == "cloud") return KickMode::cloud;
  throw std::invalid_argument("unknown kick mode '" + name + "'");
}

void MixtureDiagnostics::merge(const MixtureDiagnostics& o) {
  max_squeeze = std::max(max_squeeze, o.max_squeeze);
  max_defect_before = std::max(max_defect_before, o.max_defect_before);
  max_defect_after = std::max(max_defect_after, o.max_defect_after);
  max_projection_shift = std::max(max_projection_shift, o.max_projection_shift);
  max_nts_excess = std::max(max_nts_excess, o.max_nts_excess);
  max_noise_clip = std::max(max_noise_clip, o.max_noise_clip);
  projections += o.projections;
  collapses += o.collapses;
  domain_exits += o.domain_exits;
}

double MixtureEnsemble::total_weight() const {
  double s = 0.0;
  for (const auto& p : particles) s += p.weight;
  return s;
}

Mat whitening(const ScaleReport& scales) {
  return scales.sigma_star.diagonal().cwiseSqrt().cwiseInverse().asDiagonal();
}

namespace {

constexpr double kZFloor = 1.0 + 1e-6;

double relaxation_rate(const ScaleReport& scales, double z) {
  const double z_eff = std::max(z, kZFloor);
  return scales.diffusion_rate / (1.0 - 1.0 / (z_eff * z_eff));
}

Vec drift(const HamiltonianModel& model, const Vec& alpha, const Mat* spread) {
  Vec f = flow_vector(model, alpha).velocity;
  if (spread) {
    // Mean velocity of a Gaussian cloud of centres: the quadratic term of grad V.
    const int d = model.dims;
    for (int k = 0; k < d; ++k) f[d + k] -= 0.5 * model.potential.d3v(alpha[k]) * (*spread)(k, k);
  }
  return f;
}

Vec rk4(const HamiltonianModel& model, const Vec& a, double dt, const Mat* spread) {
  const Vec k1 = drift(model, a, spread);
  const Vec k2 = drift(model, a + 0.5 * dt * k1, spread);
  const Vec k3 = drift(model, a + 0.5 * dt * k2, spread);
  const Vec k4 = drift(model, a + dt * k3, spread);
  return a + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Exact flow of d(sigma)/dt = -(M sigma + sigma M) = -2 c (sigma^2 - I) in the eigenbasis.
Mat relax(const Mat& st, double c, double t) {
  if (c == 0.0 || t == 0.0) return st;
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(st));
  Vec lam = es.eigenvalues();
  const double decay = std::exp(-4.0 * c * t);
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    const double u = (lam[i] - 1.0) / (lam[i] + 1.0) * decay;
    lam[i] = (1.0 + u) / (1.0 - u);
  }
  return symmetrize(es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose());
}

// Phi = exp(F dt) and int_0^dt Phi(s) D Phi(s)^T ds.
std::pair<Mat, Mat> propagate_noise(const Mat& f, const Mat& d, double dt) {
  const Eigen::Index n = f.rows();
  Mat c = Mat::Zero(2 * n, 2 * n);
  c.topLeftCorner(n, n) = -f * dt;
  c.topRightCorner(n, n) = d * dt;
  c.bottomRightCorner(n, n) = f.transpose() * dt;
  const Mat e = expm(c);
  const Mat phi = e.bottomRightCorner(n, n).transpose();
  return {phi, symmetrize(phi * e.topRightCorner(n, n))};
}

// Symmetric square root of the PSD part of q; clipped eigenvalues recorded.
Mat noise_root(const Mat& q, double clip, double& clipped, long step) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(q));
  Vec lam = es.eigenvalues();
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam[i] < 0.0) {
      if (lam[i] < -clip) {
        throw SolverAbort("kick covariance has eigenvalue " + std::to_string(lam[i]), step);
      }
      clipped = std::max(clipped, -lam[i]);
      lam[i] = 0.0;
    }
  }
  return es.eigenvectors() * lam.cwiseSqrt().asDiagonal();
}

Vec draw(const Mat& root, KeyedNormal& rng) {
  Vec z(root.cols());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng();
  return root * z;
}

Mat symplectic_projection(const Mat& sigma, double hbar) {
  const int d = static_cast<int>(sigma.rows() / 2);
  const Mat x = (2.0 / hbar) * sigma;
  const Mat om = symplectic_form(d);
  const Mat y = symmetrize(om.transpose() * x.inverse() * om);
  return symmetrize(0.5 * hbar * geometric_mean(x, y));
}

}  // namespace

Mat m_matrix(const Mat& sigma_tilde, const ScaleReport& scales, double z) {
  Eigen::LDLT<Mat> ldlt(sigma_tilde);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || min_eigenvalue(sigma_tilde) <= 0.0) {
    throw std::invalid_argument("m_matrix: sigma_tilde is not positive definite");
  }
  const Mat inv = ldlt.solve(Mat::Identity(sigma_tilde.rows(), sigma_tilde.cols()));
  return symmetrize(relaxation_rate(scales, z) * (sigma_tilde - inv));
}

SdotSplit split_sdot(const Vec& alpha, const Mat& sigma, const HamiltonianModel& model, const DiffusionSpec& diffusion,
                     const ScaleReport& scales, double z) {
  const int d = model.dims;
  if (alpha.size() != 2 * d || sigma.rows() != 2 * d) throw std::invalid_argument("split_sdot: dimension mismatch");
  if (!is_pure_gaussian(sigma, diffusion.hbar, 1e-8)) throw std::invalid_argument("split_sdot: sigma is not pure");
  if (!nts_check(sigma, scales.sigma_star, z, 1e-8 * z)) throw std::invalid_argument("split_sdot: sigma is too squeezed");
  const Mat w = whitening(scales);
  const Mat w_inv = w.inverse();
  SdotSplit s;
  s.sigma_tilde = symmetrize(w * sigma * w);
  s.m = m_matrix(s.sigma_tilde, scales, z);
  const Mat ft = w * hamiltonian_matrix(model, alpha) * w_inv;
  const Mat dt = w * diffusion.matrix(d) * w;
  s.s_z_tilde = (ft - s.m) * s.sigma_tilde + s.sigma_tilde * (ft.transpose() - s.m);
  s.s_d_tilde = dt + s.m * s.sigma_tilde + s.sigma_tilde * s.m;
  s.s_z = w_inv * s.s_z_tilde * w_inv;
  s.s_d = w_inv * s.s_d_tilde * w_inv;
  return s;
}

double tangency_defect(const Mat& sigma_tilde, const Mat& s_z_tilde) {
  const int d = static_cast<int>(sigma_tilde.rows() / 2);
  const Mat om = symplectic_form(d);
  const Mat a = sigma_tilde.ldlt().solve(s_z_tilde);
  return max_abs(a.transpose() + om.transpose() * a * om);
}

MixtureEnsemble make_ensemble(const std::vector<std::pair<double, GaussianState>>& components, int copies,
                              const ScaleReport& scales, std::optional<double> z_cap, std::uint64_t seed) {
  if (components.empty() || copies < 1) throw std::invalid_argument("make_ensemble: empty ensemble");
  MixtureEnsemble ens;
  ens.scales = scales;
  ens.bound_applicable = scales.z.has_value();
  ens.z = scales.z_in_force(z_cap);
  ens.seed = seed;
  double total = 0.0;
  for (const auto& [w, s] : components) {
    if (!(w >= 0.0)) throw std::invalid_argument("make_ensemble: negative weight");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("make_ensemble: weights sum to zero");
  for (const auto& [w, s] : components) {
    if (s.mean.size() != 2 * scales.dims || s.cov.rows() != 2 * scales.dims) {
      throw std::invalid_argument("make_ensemble: component dimension mismatch");
    }
    if (!is_pure_gaussian(s.cov, scales.hbar, 1e-8)) throw std::invalid_argument("make_ensemble: component is not pure");
    const double ratio = squeeze_ratio(s.cov, scales.sigma_star);
    if (ratio > ens.z * (1.0 + 1e-9)) {
      std::ostringstream msg;
      msg << "make_ensemble: initial state squeezed by " << ratio << ", beyond the bound z = " << ens.z;
      throw std::invalid_argument(msg.str());
    }
    for (int c = 0; c < copies; ++c) {
      MixtureParticle p;
      p.weight = w / (total * copies);
      p.state = s;
      p.state.hbar = scales.hbar;
      p.spread = Mat::Zero(s.cov.rows(), s.cov.cols());
      ens.particles.push_back(std::move(p));
    }
  }
  return ens;
}

MixtureParticle step_particle(const MixtureParticle& particle, const HamiltonianModel& model,
                              const DiffusionSpec& diffusion, const ScaleReport& scales, double z, double dt,
                              const MixtureSettings& settings, KeyedNormal& rng, MixtureDiagnostics& diag,
                              long step_index) {
  const int d = model.dims;
  const double hbar = scales.hbar;
  const bool cloud = settings.kick == KickMode::cloud;
  const Mat w = whitening(scales);
  const Vec wd = w.diagonal();
  const Vec wi = wd.cwiseInverse();
  const Vec& alpha = particle.state.mean;
  const Mat* spread = cloud ? &particle.spread : nullptr;

  // Linearise about the midpoint of the deterministic drift.
  const Vec alpha_mid = rk4(model, alpha, 0.5 * dt, spread);
  const Mat ft = wd.asDiagonal() * hamiltonian_matrix(model, alpha_mid) * wi.asDiagonal();
  const Mat dtl = wd.asDiagonal() * diffusion.matrix(d) * wd.asDiagonal();

  const Mat st_old = symmetrize(wd.asDiagonal() * particle.state.cov * wd.asDiagonal());
  const double c = relaxation_rate(scales, z);
  const auto [phi, noise] = propagate_noise(ft, dtl, dt);

  // S_Z flow: relaxation and linear transport composed symmetrically.
  Mat st = relax(st_old, c, 0.5 * dt);
  st = symmetrize(phi * st * phi.transpose());
  st = relax(st, c, 0.5 * dt);

  MixtureParticle out = particle;
  Mat sigma = symmetrize(wi.asDiagonal() * st * wi.asDiagonal());
  const double defect = symplectic_defect(sigma, hbar);
  diag.max_defect_before = std::max(diag.max_defect_before, defect);
  if (defect > settings.projection_tol) {
    const Mat projected = symplectic_projection(sigma, hbar);
    diag.max_projection_shift = std::max(diag.max_projection_shift, max_abs(projected - sigma) / max_abs(sigma));
    ++diag.projections;
    sigma = projected;
    st = symmetrize(wd.asDiagonal() * sigma * wd.asDiagonal());
  }

  {
    Eigen::SelfAdjointEigenSolver<Mat> es(st);
    Vec lam = es.eigenvalues();
    const double excess = std::max(lam.maxCoeff() - z, 1.0 / z - lam.minCoeff()) / z;
    if (excess > 0.0) {
      diag.max_nts_excess = std::max(diag.max_nts_excess, excess);
      if (excess > settings.nts_tol) {
        std::ostringstream msg;
        msg << "covariance left the squeeze window (relative excess " << excess << ", z = " << z << ")";
        throw SolverAbort(msg.str(), step_index);
      }
      for (Eigen::Index i = 0; i < lam.size(); ++i) lam[i] = std::clamp(lam[i], 1.0 / z, z);
      st = symmetrize(es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose());
      sigma = symmetrize(wi.asDiagonal() * st * wi.asDiagonal());
    }
  }
  diag.max_squeeze = std::max(diag.max_squeeze, squeeze_ratio(sigma, scales.sigma_star));
  diag.max_defect_after = std::max(diag.max_defect_after, symplectic_defect(sigma, hbar));

  // Everything the covariance step did not absorb becomes spread of the centre.
  const Mat q = symmetrize(phi * st_old * phi.transpose() + noise - st);
  Vec next = rk4(model, alpha, dt, spread);
  if (cloud) {
    const Mat sp_old = symmetrize(wd.asDiagonal() * particle.spread * wd.asDiagonal());
    Mat sp = symmetrize(phi * sp_old * phi.transpose() + q);
    // Same clipping contract as the stochastic kick.
    const Mat root = noise_root(sp, settings.noise_clip, diag.max_noise_clip, step_index);
    sp = symmetrize(root * root.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(sp);
    const Vec lam = es.eigenvalues();
    if (lam.maxCoeff() > settings.collapse_cap) {
      Vec keep = lam, gap = Vec::Zero(lam.size());
      for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam[i] > settings.collapse_cap) {
          keep[i] = 0.5 * settings.collapse_cap;
          gap[i] = std::sqrt(lam[i] - keep[i]);
        }
      }
      const Vec xi = draw(es.eigenvectors() * gap.asDiagonal(), rng);
      next += wi.asDiagonal() * xi;
      sp = symmetrize(es.eigenvectors() * keep.asDiagonal() * es.eigenvectors().transpose());
      ++diag.collapses;
    }
    out.spread = symmetrize(wi.asDiagonal() * sp * wi.asDiagonal());
  } else {
    const Mat root = noise_root(q, settings.noise_clip, diag.max_noise_clip, step_index);
    next += wi.asDiagonal() * draw(root, rng);
  }
  out.state.mean = next;
  out.state.cov = sigma;
  if (!model.contains(next.head(d))) ++diag.domain_exits;
  return out;
}

std::vector<MixtureEnsemble> evolve_mixture(const MixtureEnsemble& ens, const HamiltonianModel& model,
                                            const DiffusionSpec& diffusion, double T, double dt,
                                            const MixtureSettings& settings, int snapshots,
                                            const MixtureObserver& observer) {
  if (!(T >= 0.0) || !(dt > 0.0) || snapshots < 1) throw std::invalid_argument("evolve_mixture: bad T/dt");
  if (dt > 1e-2 * ens.scales.tau_H * (1.0 + 1e-12)) {
    throw std::invalid_argument("evolve_mixture: dt must not exceed tau_H/100 = " + std::to_string(1e-2 * ens.scales.tau_H));
  }
  if (ens.particles.empty()) throw std::invalid_argument("evolve_mixture: empty ensemble");
  const long per_snap = std::max(1L, static_cast<long>(std::ceil(T / (snapshots * dt) - 1e-12)));
  const double h = T / (static_cast<double>(snapshots) * per_snap);

  std::vector<MixtureEnsemble> out;
  auto emit = [&](const MixtureEnsemble& e) {
    if (observer) {
      observer(e);
    } else {
      out.push_back(e);
    }
  };
  MixtureEnsemble cur = ens;
  emit(cur);
  if (T == 0.0) return out;
  const long count = static_cast<long>(cur.particles.size());
  for (int k = 1; k <= snapshots; ++k) {
    std::exception_ptr failure;
#pragma omp parallel
    {
      MixtureDiagnostics local;
#pragma omp for schedule(static)
      for (long i = 0; i < count; ++i) {
        try {
          MixtureParticle p = cur.particles[i];
          for (long s = 0; s < per_snap; ++s) {
            const long step = cur.steps_taken + s;
            KeyedNormal rng(cur.seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(step));
            p = step_particle(p, model, diffusion, cur.scales, cur.z, h, settings, rng, local, step);
          }
          cur.particles[i] = std::move(p);
        } catch (...) {
#pragma omp critical(qcc_mixture_failure)
          if (!failure) failure = std::current_exception();
        }
      }
#pragma omp critical(qcc_mixture_diag)
      cur.diagnostics.merge(local);
    }
    if (failure) std::rethrow_exception(failure);
    cur.steps_taken += per_snap;
    cur.t = ens.t + k * per_snap * h;
    emit(cur);
  }
  return out;
}

DensityMatrixGrid mixture_to_density_grid(const MixtureEnsemble& ens, const QuantumGrid& grid, double mass,
                                          double coverage_tol) {
  grid.validate();
  if (ens.dims() != 1) throw std::invalid_argument("mixture_to_density_grid: d must be 1");
  DensityMatrixGrid out{grid, ens.scales.hbar, mass, ens.t, CMat::Zero(grid.n, grid.n)};
  for (const auto& p : ens.particles) {
    if (p.weight == 0.0) continue;
    const Mat cov = p.state.cov + p.spread;
    add_gaussian_to_grid(out.rho, grid, ens.scales.hbar, p.weight, p.state.mean, cov);
  }
  if (std::abs(out.trace() - ens.total_weight()) > coverage_tol) {
    throw std::invalid_argument("mixture_to_density_grid: grid does not hold the mixture (trace " +
                                std::to_string(out.trace()) + ")");
  }
  return out;
}

PhaseField mixture_to_phase_field(const MixtureEnsemble& ens, const PhaseGrid& grid, Sampling sampling,
                                  double coverage_tol) {
  grid.validate();
  if (ens.dims() != 1) throw std::invalid_argument("mixture_to_phase_field: d must be 1");
  PhaseField f(grid);
  for (const auto& p : ens.particles) {
    if (p.weight == 0.0) continue;
    add_gaussian(f, p.weight, p.state.mean, p.state.cov + p.spread, sampling);
  }
  if (std::abs(f.total_mass() - ens.total_weight()) > coverage_tol) {
    throw std::invalid_argument("mixture_to_phase_field: grid does not hold the mixture (mass " +
                                std::to_string(f.total_mass()) + ")");
  }
  return f;
}

void write_ensemble_csv(const MixtureEnsemble& ens, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  const int n = 2 * ens.dims();
  const int d = ens.dims();
  out.precision(12);
  out << "weight";
  for (int k = 0; k < n; ++k) out << ",alpha_" << (k < d ? "x" : "p") << (k % d + 1);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) out << ",sigma_" << i << '_' << j;
  }
  out << ",squeeze";
  bool has_spread = false;
  for (const auto& p : ens.particles) has_spread = has_spread || max_abs(p.spread) > 0.0;
  if (has_spread) {
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) out << ",spread_" << i << '_' << j;
    }
  }
  out << '\n';
  for (const auto& p : ens.particles) {
    out << p.weight;
    for (int k = 0; k < n; ++k) out << ',' << p.state.mean[k];
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) out << ',' << p.state.cov(i, j);
    }
    out << ',' << squeeze_ratio(p.state.cov, ens.scales.sigma_star);
    if (has_spread) {
      for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) out << ',' << p.spread(i, j);
      }
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string summary(const MixtureEnsemble& ens) {
  const auto& g = ens.diagnostics;
  std::ostringstream s;
  s.precision(6);
  s << "particles = " << ens.particles.size() << '\n'
    << "t = " << ens.t << '\n'
    << "z = " << ens.z << '\n'
    << "bound_applicable = " << (ens.bound_applicable ? "true" : "false") << '\n'
    << "max_squeeze = " << g.max_squeeze << '\n'
    << "max_defect_before_projection = " << g.max_defect_before << '\n'
    << "max_defect_after_projection = " << g.max_defect_after << '\n'
    << "max_projection_shift = " << g.max_projection_shift << '\n'
    << "projections = " << g.projections << '\n'
    << "max_nts_excess = " << g.max_nts_excess << '\n'
    << "max_noise_clip = " << g.max_noise_clip << '\n'
    << "collapses = " << g.collapses << '\n'
    << "domain_exits = " << g.domain_exits << '\n';
  return s.str();
}

}  // namespace qcc
