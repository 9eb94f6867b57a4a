#include "qcc/fokker_planck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "fft.hpp"

namespace qcc {

using detail::FftPlan;

std::string to_string(FpScheme s) { return s == FpScheme::spectral ? "spectral" : "finite_volume"; }

FpScheme fp_scheme_from_string(const std::string& name) {
  if (name == "finite_volume") return FpScheme::finite_volume;
  if (name == "spectral") return FpScheme::spectral;
  throw std::invalid_argument("unknown Fokker-Planck scheme '" + name + "'");
}

struct FokkerPlanckSolver::Impl {
  std::vector<double> line;  // one line plus two ghost cells per side
  std::vector<double> flux;
  CMat buf;
  FftPlan x_fwd, x_bwd, p_fwd, p_bwd;
  Vec kx, kp;
};

namespace {

double mc_limiter(double r) { return std::max(0.0, std::min({2.0 * r, 0.5 * (1.0 + r), 2.0})); }

// One flux-limited Lax-Wendroff update of n cells read/written with `stride`,
// constant Courant number nu (|nu| <= 1). Ghost cells are zero, so mass that
// crosses either end is lost.
void advect_line(double* f, long stride, int n, double nu, std::vector<double>& line, std::vector<double>& flux) {
  line.assign(n + 4, 0.0);
  for (int i = 0; i < n; ++i) line[i + 2] = f[i * stride];
  flux.assign(n + 1, 0.0);
  const double a = std::abs(nu);
  for (int k = 0; k <= n; ++k) {
    // Interface between cells k-1 and k (line indices k+1, k+2).
    const int up = nu >= 0.0 ? k + 1 : k + 2;     // upwind cell
    const int dn = nu >= 0.0 ? k + 2 : k + 1;     // downwind cell
    const int uu = nu >= 0.0 ? k : k + 3;         // second upwind
    const double jump = line[dn] - line[up];
    double phi = 0.0;
    if (jump != 0.0) phi = mc_limiter((line[up] - line[uu]) / jump);
    flux[k] = nu * (line[up] + 0.5 * (1.0 - a) * phi * jump);
  }
  for (int i = 0; i < n; ++i) f[i * stride] = line[i + 2] - (flux[i + 1] - flux[i]);
}

}  // namespace

FokkerPlanckSolver::FokkerPlanckSolver(const PhaseGrid& grid, const HamiltonianModel& model,
                                       const DiffusionSpec& diffusion, FpScheme scheme)
    : grid_(grid), mass_(model.mass), diffusion_(diffusion), scheme_(scheme), impl_(std::make_unique<Impl>()) {
  grid.validate();
  diffusion.validate();
  if (model.dims != 1) throw std::invalid_argument("FokkerPlanckSolver: model must be one-dimensional");
  force_.resize(grid.nx);
  for (int i = 0; i < grid.nx; ++i) force_[i] = -model.potential.dv(grid.x(i));
  if (scheme == FpScheme::spectral) {
    Impl& s = *impl_;
    s.buf.resize(grid.nx, grid.np);
    s.x_fwd = FftPlan::many(grid.nx, grid.np, 1, grid.nx, s.buf.data(), FFTW_FORWARD);
    s.x_bwd = FftPlan::many(grid.nx, grid.np, 1, grid.nx, s.buf.data(), FFTW_BACKWARD);
    s.p_fwd = FftPlan::many(grid.np, grid.nx, grid.nx, 1, s.buf.data(), FFTW_FORWARD);
    s.p_bwd = FftPlan::many(grid.np, grid.nx, grid.nx, 1, s.buf.data(), FFTW_BACKWARD);
    auto wavenumbers = [](int n, double h) {
      Vec k(n);
      for (int a = 0; a < n; ++a) k[a] = 2.0 * std::numbers::pi * (a < n / 2 ? a : a - n) / (n * h);
      return k;
    };
    s.kx = wavenumbers(grid.nx, grid.dx());
    s.kp = wavenumbers(grid.np, grid.dp());
  }
}

FokkerPlanckSolver::~FokkerPlanckSolver() = default;

double FokkerPlanckSolver::max_stable_dt() const {
  if (scheme_ == FpScheme::spectral) return std::numeric_limits<double>::infinity();
  const double vmax = std::max(std::abs(grid_.p_min), std::abs(grid_.p_max)) / mass_;
  const double fmax = force_.cwiseAbs().maxCoeff();
  double dt = std::numeric_limits<double>::infinity();
  if (vmax > 0.0) dt = std::min(dt, grid_.dx() / vmax);
  if (fmax > 0.0) dt = std::min(dt, grid_.dp() / fmax);
  const double diff_rate = diffusion_.position / (grid_.dx() * grid_.dx()) + diffusion_.momentum / (grid_.dp() * grid_.dp());
  if (diff_rate > 0.0) dt = std::min(dt, 1.0 / diff_rate);
  return dt;
}

void FokkerPlanckSolver::advect_x(PhaseField& f, double dt) {
  const double before = f.values.sum();
  for (int j = 0; j < grid_.np; ++j) {
    const double nu = grid_.p(j) / mass_ * dt / grid_.dx();
    advect_line(&f.values(0, j), 1, grid_.nx, nu, impl_->line, impl_->flux);
  }
  leaked_ += (before - f.values.sum()) * grid_.cell_area();
}

void FokkerPlanckSolver::advect_p(PhaseField& f, double dt) {
  const double before = f.values.sum();
  for (int i = 0; i < grid_.nx; ++i) {
    const double nu = force_[i] * dt / grid_.dp();
    advect_line(&f.values(i, 0), grid_.nx, grid_.np, nu, impl_->line, impl_->flux);
  }
  leaked_ += (before - f.values.sum()) * grid_.cell_area();
}

void FokkerPlanckSolver::diffuse(PhaseField& f, double dt) {
  const double cx = 0.5 * diffusion_.position * dt / (grid_.dx() * grid_.dx());
  const double cp = 0.5 * diffusion_.momentum * dt / (grid_.dp() * grid_.dp());
  if (cx == 0.0 && cp == 0.0) return;
  const double before = f.values.sum();
  const Mat& v = f.values;
  Mat next = v;
  const int nx = grid_.nx, np = grid_.np;
  for (int j = 0; j < np; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double l = i > 0 ? v(i - 1, j) : 0.0, r = i + 1 < nx ? v(i + 1, j) : 0.0;
      const double d = j > 0 ? v(i, j - 1) : 0.0, u = j + 1 < np ? v(i, j + 1) : 0.0;
      next(i, j) += cx * (l - 2.0 * v(i, j) + r) + cp * (d - 2.0 * v(i, j) + u);
    }
  }
  f.values.swap(next);
  leaked_ += (before - f.values.sum()) * grid_.cell_area();
}

void FokkerPlanckSolver::spectral_x(PhaseField& f, double dt) {
  Impl& s = *impl_;
  s.buf = f.values.cast<cplx>();
  s.x_fwd.execute();
  const double nrm = 1.0 / grid_.nx;
  for (int j = 0; j < grid_.np; ++j) {
    const double u = grid_.p(j) / mass_ * dt;
    for (int a = 0; a < grid_.nx; ++a) {
      const double k = s.kx[a];
      const double damp = std::exp(-0.5 * diffusion_.position * k * k * dt) * nrm;
      s.buf(a, j) *= damp * cplx(std::cos(k * u), -std::sin(k * u));
    }
  }
  s.x_bwd.execute();
  f.values = s.buf.real();
}

void FokkerPlanckSolver::spectral_p(PhaseField& f, double dt) {
  Impl& s = *impl_;
  s.buf = f.values.cast<cplx>();
  s.p_fwd.execute();
  const double nrm = 1.0 / grid_.np;
  for (int b = 0; b < grid_.np; ++b) {
    const double k = s.kp[b];
    const double damp = std::exp(-0.5 * diffusion_.momentum * k * k * dt) * nrm;
    for (int i = 0; i < grid_.nx; ++i) {
      const double u = force_[i] * dt;
      s.buf(i, b) *= damp * cplx(std::cos(k * u), -std::sin(k * u));
    }
  }
  s.p_bwd.execute();
  f.values = s.buf.real();
}

void FokkerPlanckSolver::step(PhaseField& f, double dt) {
  if (!f.grid.same_as(grid_)) throw std::invalid_argument("FokkerPlanckSolver: field grid mismatch");
  if (scheme_ == FpScheme::spectral) {
    // Diffusion factors commute with the shifts along the same axis.
    spectral_x(f, 0.5 * dt);
    spectral_p(f, dt);
    spectral_x(f, 0.5 * dt);
    const int nx = grid_.nx;
    leaked_ = (f.values.topRows(2).cwiseAbs().sum() + f.values.bottomRows(2).cwiseAbs().sum() +
               f.values.middleRows(2, nx - 4).leftCols(2).cwiseAbs().sum() +
               f.values.middleRows(2, nx - 4).rightCols(2).cwiseAbs().sum()) *
              grid_.cell_area();
    return;
  }
  diffuse(f, 0.5 * dt);
  advect_x(f, 0.5 * dt);
  advect_p(f, dt);
  advect_x(f, 0.5 * dt);
  diffuse(f, 0.5 * dt);
}

std::vector<PhaseField> evolve_fokker_planck(const PhaseField& f0, const HamiltonianModel& model,
                                             const DiffusionSpec& diffusion, double T, double dt,
                                             const FokkerPlanckOptions& options, const FieldObserver& observer) {
  if (!(T >= 0.0) || !(dt > 0.0) || options.snapshots < 1) throw std::invalid_argument("evolve_fokker_planck: bad T/dt");
  FokkerPlanckSolver solver(f0.grid, model, diffusion, options.scheme);
  if (dt > solver.max_stable_dt()) {
    std::ostringstream msg;
    msg << "evolve_fokker_planck: dt=" << dt << " violates the CFL condition; use dt <= " << solver.max_stable_dt();
    throw std::invalid_argument(msg.str());
  }
  const long per_snap = std::max(1L, static_cast<long>(std::ceil(T / (options.snapshots * dt) - 1e-12)));
  const double h = T / (static_cast<double>(options.snapshots) * per_snap);
  std::vector<PhaseField> out;
  auto emit = [&](const PhaseField& f, double t) {
    if (observer) {
      observer(f, t);
    } else {
      out.push_back(f);
    }
  };
  PhaseField cur = f0;
  emit(cur, 0.0);
  if (T == 0.0) return out;
  long step = 0;
  for (int k = 1; k <= options.snapshots; ++k) {
    for (long s = 0; s < per_snap; ++s) {
      solver.step(cur, h);
      ++step;
      if (solver.leaked_mass() > options.leak_tol) {
        throw SolverAbort("mass leaked through the phase-space boundary (" + std::to_string(solver.leaked_mass()) + ")",
                          step);
      }
    }
    emit(cur, k * per_snap * h);
  }
  return out;
}

}  // namespace qcc
