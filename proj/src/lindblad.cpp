#include "qcc/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "fft.hpp"

namespace qcc {

using detail::FftPlan;

double QuantumGrid::k(int a) const {
  const int m = a < n / 2 ? a : a - n;
  return 2.0 * std::numbers::pi * m / (n * dx());
}

Vec QuantumGrid::points() const {
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = this->x(i);
  return x;
}

void QuantumGrid::validate() const {
  if (n < 8 || n % 2 != 0) throw std::invalid_argument("quantum grid: n must be even and >= 8");
  if (!(x_max > x_min)) throw std::invalid_argument("quantum grid: empty domain");
}

double DensityMatrixGrid::hermiticity_error() const { return (rho - rho.adjoint()).cwiseAbs().maxCoeff(); }

double DensityMatrixGrid::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<CMat> es(rho, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double DensityMatrixGrid::purity() const { return (rho * rho).trace().real(); }

GridMoments DensityMatrixGrid::moments() const {
  const int n = grid.n;
  GridMoments m;
  const double tr = trace();
  for (int i = 0; i < n; ++i) m.mean_x += grid.x(i) * rho(i, i).real();
  m.mean_x /= tr;
  for (int i = 0; i < n; ++i) {
    const double u = grid.x(i) - m.mean_x;
    m.var_x += u * u * rho(i, i).real();
  }
  m.var_x /= tr;

  // P rho and P^2 rho via column transforms.
  CMat y = rho;
  {
    FftPlan fwd = FftPlan::many(n, n, 1, n, y.data(), FFTW_FORWARD);
    fwd.execute();
  }
  CMat y2 = y;
  for (int a = 0; a < n; ++a) {
    const double p = hbar * grid.k(a);
    y.row(a) *= p / n;
    y2.row(a) *= p * p / n;
  }
  {
    FftPlan inv = FftPlan::many(n, n, 1, n, y.data(), FFTW_BACKWARD);
    inv.execute();
    FftPlan inv2 = FftPlan::many(n, n, 1, n, y2.data(), FFTW_BACKWARD);
    inv2.execute();
  }
  m.mean_p = y.trace().real() / tr;
  m.var_p = y2.trace().real() / tr - m.mean_p * m.mean_p;
  double xp = 0.0;
  for (int i = 0; i < n; ++i) xp += (grid.x(i) - m.mean_x) * y(i, i).real();
  m.cov_xp = xp / tr;
  return m;
}

void DensityMatrixGrid::check_invariants(long step, bool check_positivity) const {
  const double herm = hermiticity_error();
  if (herm > 1e-10) throw SolverAbort("density matrix lost Hermiticity (" + std::to_string(herm) + ")", step);
  const double tr = trace();
  if (std::abs(tr - 1.0) > 1e-8) throw SolverAbort("trace drifted to " + std::to_string(tr), step);
  if (check_positivity) {
    const double lo = min_eigenvalue();
    if (lo < -1e-6) throw SolverAbort("negative eigenvalue " + std::to_string(lo), step);
  }
}

DensityMatrixGrid gaussian_to_grid(const GaussianState& state, const QuantumGrid& grid, double mass) {
  grid.validate();
  if (state.dims() != 1) throw std::invalid_argument("gaussian_to_grid: d must be 1");
  const double sxx = state.cov(0, 0), sxp = state.cov(0, 1), spp = state.cov(1, 1);
  const double hbar = state.hbar;
  if (!is_pure_gaussian(state.cov, hbar, 1e-8) ||
      std::abs(spp - (0.25 * hbar * hbar + sxp * sxp) / sxx) > 1e-8 * spp) {
    throw std::invalid_argument("gaussian_to_grid: state is not pure");
  }
  const double xbar = state.mean[0], pbar = state.mean[1];
  const double sx = std::sqrt(sxx), sp = std::sqrt(spp);
  if (xbar - 6.0 * sx < grid.x_min || xbar + 6.0 * sx > grid.x_max - grid.dx()) {
    throw std::invalid_argument("gaussian_to_grid: grid does not cover mean +- 6 sd in position");
  }
  const double p_nyq = std::numbers::pi * hbar / grid.dx();
  if (std::abs(pbar) + 6.0 * sp > p_nyq) {
    throw std::invalid_argument("gaussian_to_grid: grid too coarse for the momentum spread");
  }
  const int n = grid.n;
  CVec psi(n);
  const cplx a = cplx(1.0, -2.0 * sxp / hbar) / (4.0 * sxx);
  for (int i = 0; i < n; ++i) {
    const double u = grid.x(i) - xbar;
    psi[i] = std::exp(-a * u * u + cplx(0.0, pbar * u / hbar));
  }
  psi /= std::sqrt(psi.squaredNorm());
  DensityMatrixGrid out{grid, hbar, mass, 0.0, psi * psi.adjoint()};
  return out;
}

void add_gaussian_to_grid(CMat& rho, const QuantumGrid& grid, double hbar, double weight, const Vec& mean,
                          const Mat& cov) {
  if (mean.size() != 2) throw std::invalid_argument("add_gaussian_to_grid: d must be 1");
  const double a = cov(0, 0), c = cov(0, 1), b = cov(1, 1);
  const double bc = b - c * c / a;
  if (!(a > 0.0) || !(bc > 0.0)) throw std::invalid_argument("add_gaussian_to_grid: covariance not positive definite");
  const double dx = grid.dx();
  const double w = std::sqrt(80.0 * a) + 0.5 * std::sqrt(80.0) * hbar / std::sqrt(bc);
  const int lo = std::max(0, static_cast<int>(std::floor((mean[0] - w - grid.x_min) / dx)));
  const int hi = std::min(grid.n - 1, static_cast<int>(std::ceil((mean[0] + w - grid.x_min) / dx)));
  const double norm = weight * dx / std::sqrt(2.0 * std::numbers::pi * a);
  for (int j = lo; j <= hi; ++j) {
    for (int i = lo; i <= hi; ++i) {
      const double xi = grid.x(i), xj = grid.x(j);
      const double X = 0.5 * (xi + xj) - mean[0];
      const double y = xi - xj;
      const double expo = -X * X / (2.0 * a) - bc * y * y / (2.0 * hbar * hbar);
      if (expo < -40.0) continue;
      const double phase = (mean[1] + c * X / a) * y / hbar;
      rho(i, j) += norm * std::exp(expo) * cplx(std::cos(phase), std::sin(phase));
    }
  }
}

std::string to_string(LindbladMethod m) { return m == LindbladMethod::split ? "split" : "rk4"; }

LindbladMethod lindblad_method_from_string(const std::string& name) {
  if (name == "rk4") return LindbladMethod::rk4;
  if (name == "split") return LindbladMethod::split;
  throw std::invalid_argument("unknown Lindblad method '" + name + "'");
}

struct LindbladSolver::Impl {
  int n;
  CMat pos_mult;
  CMat mom_mult;  // includes the 1/n^2 of the round trip
  CMat scratch;
  CMat k1, k2, k3, k4, tmp;
  FftPlan fwd, bwd;
  double max_rate = 0.0;
  double split_dt = 0.0;
  CMat pos_half, mom_full;  // exp(pos_mult dt/2), exp(mom_mult dt) / n^2
};

LindbladSolver::LindbladSolver(const QuantumGrid& grid, const HamiltonianModel& model, const DiffusionSpec& diffusion)
    : impl_(std::make_unique<Impl>()) {
  grid.validate();
  diffusion.validate();
  if (model.dims != 1) throw std::invalid_argument("LindbladSolver: model must be one-dimensional");
  const int n = grid.n;
  const double hbar = diffusion.hbar, m = model.mass;
  Impl& s = *impl_;
  s.n = n;
  s.pos_mult.resize(n, n);
  s.mom_mult.resize(n, n);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = model.potential.v(grid.x(i));
  double max_pos = 0.0, max_mom = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double dxij = grid.x(i) - grid.x(j);
      const cplx g(-diffusion.momentum * dxij * dxij / (2.0 * hbar * hbar), -(v[i] - v[j]) / hbar);
      s.pos_mult(i, j) = g;
      max_pos = std::max(max_pos, std::abs(g));
    }
  }
  const double inv_n2 = 1.0 / (static_cast<double>(n) * n);
  for (int c = 0; c < n; ++c) {
    const double kc = grid.k((n - c) % n);
    for (int a = 0; a < n; ++a) {
      const double ka = grid.k(a);
      const cplx g(-0.5 * diffusion.position * (ka - kc) * (ka - kc), -0.5 * hbar / m * (ka * ka - kc * kc));
      s.mom_mult(a, c) = g * inv_n2;
      max_mom = std::max(max_mom, std::abs(g));
    }
  }
  s.max_rate = max_pos + max_mom;
  s.scratch.resize(n, n);
  s.fwd = FftPlan::two_d(n, n, s.scratch.data(), FFTW_FORWARD);
  s.bwd = FftPlan::two_d(n, n, s.scratch.data(), FFTW_BACKWARD);
}

LindbladSolver::~LindbladSolver() = default;

void LindbladSolver::rhs(const CMat& rho, CMat& out) {
  Impl& s = *impl_;
  s.scratch = rho;
  s.fwd.execute();
  s.scratch.array() *= s.mom_mult.array();
  s.bwd.execute();
  out = s.scratch;
  out.array() += s.pos_mult.array() * rho.array();
}

void LindbladSolver::step(CMat& rho, double dt) {
  Impl& s = *impl_;
  rhs(rho, s.k1);
  s.tmp = rho + 0.5 * dt * s.k1;
  rhs(s.tmp, s.k2);
  s.tmp = rho + 0.5 * dt * s.k2;
  rhs(s.tmp, s.k3);
  s.tmp = rho + dt * s.k3;
  rhs(s.tmp, s.k4);
  rho += (dt / 6.0) * (s.k1 + 2.0 * s.k2 + 2.0 * s.k3 + s.k4);
}

void LindbladSolver::split_step(CMat& rho, double dt) {
  Impl& s = *impl_;
  if (dt != s.split_dt) {
    const double n2 = static_cast<double>(s.n) * s.n;
    s.pos_half = (0.5 * dt * s.pos_mult.array()).exp();
    s.mom_full = (dt * n2 * s.mom_mult.array()).exp() / n2;
    s.split_dt = dt;
  }
  s.scratch = rho.cwiseProduct(s.pos_half);
  s.fwd.execute();
  s.scratch.array() *= s.mom_full.array();
  s.bwd.execute();
  rho = s.scratch.cwiseProduct(s.pos_half);
}

double LindbladSolver::max_stable_dt() const { return 2.5 / impl_->max_rate; }

double LindbladSolver::edge_mass(const CMat& rho) {
  Impl& s = *impl_;
  const int n = s.n;
  const int band = std::max(1, n / 40);
  double edge = 0.0;
  for (int i = 0; i < band; ++i) edge += rho(i, i).real() + rho(n - 1 - i, n - 1 - i).real();
  s.scratch = rho;
  s.fwd.execute();
  for (int a = n / 2 - band; a < n / 2 + band; ++a) edge += s.scratch(a, (n - a) % n).real() / n;
  return edge;
}

CMat apply_lindbladian(const DensityMatrixGrid& rho, const HamiltonianModel& model, const DiffusionSpec& diffusion) {
  if (rho.rho.rows() != rho.grid.n || rho.rho.cols() != rho.grid.n) {
    throw std::invalid_argument("apply_lindbladian: matrix does not match the grid");
  }
  DiffusionSpec d = diffusion;
  d.hbar = rho.hbar;
  LindbladSolver solver(rho.grid, model, d);
  CMat out;
  solver.rhs(rho.rho, out);
  return out;
}

std::vector<DensityMatrixGrid> evolve_lindblad(const DensityMatrixGrid& rho0, const HamiltonianModel& model,
                                               const DiffusionSpec& diffusion, double T, double dt,
                                               const LindbladOptions& options, const DensityObserver& observer) {
  if (!(T >= 0.0) || !(dt > 0.0) || options.snapshots < 1) throw std::invalid_argument("evolve_lindblad: bad T/dt");
  DiffusionSpec d = diffusion;
  d.hbar = rho0.hbar;
  LindbladSolver solver(rho0.grid, model, d);
  const bool split = options.method == LindbladMethod::split;
  if (!split && dt > solver.max_stable_dt()) {
    std::ostringstream msg;
    msg << "evolve_lindblad: dt=" << dt << " exceeds the stability limit; use dt <= " << solver.max_stable_dt();
    throw std::invalid_argument(msg.str());
  }
  const long per_snap = std::max(1L, static_cast<long>(std::ceil(T / (options.snapshots * dt) - 1e-12)));
  const double h = T / (static_cast<double>(options.snapshots) * per_snap);

  std::vector<DensityMatrixGrid> out;
  auto emit = [&](const DensityMatrixGrid& s, long step) {
    s.check_invariants(step, options.check_positivity);
    const double edge = solver.edge_mass(s.rho);
    if (edge > options.edge_tol) throw SolverAbort("probability reached the grid edge (" + std::to_string(edge) + ")", step);
    if (observer) {
      observer(s);
    } else {
      out.push_back(s);
    }
  };
  DensityMatrixGrid cur = rho0;
  emit(cur, 0);
  if (T == 0.0) return out;
  long step = 0;
  for (int k = 1; k <= options.snapshots; ++k) {
    for (long s = 0; s < per_snap; ++s) {
      if (split) {
        solver.split_step(cur.rho, h);
      } else {
        solver.step(cur.rho, h);
      }
      ++step;
    }
    cur.t = rho0.t + k * per_snap * h;
    emit(cur, step);
  }
  return out;
}

namespace {

// Destination slots in a length-2n spectrum for source FFT index a of length n;
// the Nyquist bin is split evenly between +n/2 and -n/2.
int upsample_slots(int a, int n, int* dst, double* fac) {
  if (a < n / 2) {
    dst[0] = a;
    fac[0] = 1.0;
    return 1;
  }
  if (a > n / 2) {
    dst[0] = a + n;
    fac[0] = 1.0;
    return 1;
  }
  dst[0] = n / 2;
  dst[1] = 3 * n / 2;
  fac[0] = fac[1] = 0.5;
  return 2;
}

}  // namespace

PhaseField wigner_transform_grid(const DensityMatrixGrid& rho) {
  const int n = rho.grid.n;
  const int n2 = 2 * n;
  const double dx = rho.grid.dx();
  const double hbar = rho.hbar;

  CMat spec = rho.rho / dx;
  {
    FftPlan f = FftPlan::two_d(n, n, spec.data(), FFTW_FORWARD);
    f.execute();
  }
  CMat up = CMat::Zero(n2, n2);
  for (int c = 0; c < n; ++c) {
    int dc[2];
    double fc[2];
    const int nc = upsample_slots(c, n, dc, fc);
    for (int a = 0; a < n; ++a) {
      int da[2];
      double fa[2];
      const int na = upsample_slots(a, n, da, fa);
      for (int u = 0; u < na; ++u) {
        for (int v = 0; v < nc; ++v) up(da[u], dc[v]) += fa[u] * fc[v] * spec(a, c);
      }
    }
  }
  {
    FftPlan b = FftPlan::two_d(n2, n2, up.data(), FFTW_BACKWARD);
    b.execute();
  }
  up /= static_cast<double>(n) * n;

  // W(x_i, p) = (1/(pi hbar)) sum_k rho(x_i + k h, x_i - k h) e^{-2 i p k h / hbar} h, h = dx/2.
  const double h = 0.5 * dx;
  CMat g(n2, n);
  for (int i = 0; i < n; ++i) {
    const int c0 = 2 * i;
    for (int k = 0; k < n2; ++k) {
      const int kk = k < n ? k : k - n2;
      const int r = c0 + kk;
      const int s = c0 - kk;
      // The state lives on [x_min, x_max); periodic images must not pair up.
      g(k, i) = (r < 0 || r >= n2 || s < 0 || s >= n2) ? std::complex<double>(0.0) : up(r, s) * h;
    }
  }
  {
    FftPlan f = FftPlan::many(n2, n, 1, n2, g.data(), FFTW_FORWARD);
    f.execute();
  }
  const double dp = std::numbers::pi * hbar / (n * dx);
  PhaseGrid pg{n, n2, rho.grid.x_min - 0.5 * dx, rho.grid.x_min + (n - 0.5) * dx, -(n + 0.5) * dp, (n - 0.5) * dp};
  PhaseField w(pg);
  for (int i = 0; i < n; ++i) {
    for (int m = 0; m < n2; ++m) {
      const int slot = m < n ? m + n : m - n;  // FFT order -> ascending momentum
      w.values(i, slot) = g(m, i).real() / (std::numbers::pi * hbar);
    }
  }
  return w;
}

double trace_distance(const CMat& rho1, const CMat& rho2) {
  if (rho1.rows() != rho2.rows() || rho1.cols() != rho2.cols()) throw std::invalid_argument("trace_distance: size mismatch");
  CMat diff = rho1 - rho2;
  diff = 0.5 * (diff + diff.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<CMat> es(diff, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const DensityMatrixGrid& rho1, const DensityMatrixGrid& rho2) {
  if (!rho1.grid.same_as(rho2.grid)) throw std::invalid_argument("trace_distance: grid mismatch");
  return trace_distance(rho1.rho, rho2.rho);
}

void write_snapshot(const DensityMatrixGrid& rho, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.precision(17);
  out << "qcc-density " << rho.grid.n << ' ' << rho.grid.x_min << ' ' << rho.grid.x_max << ' ' << rho.hbar << ' '
      << rho.mass << ' ' << rho.t << '\n';
  out.write(reinterpret_cast<const char*>(rho.rho.data()),
            static_cast<std::streamsize>(sizeof(cplx) * rho.rho.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

DensityMatrixGrid read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string magic;
  DensityMatrixGrid r;
  hs >> magic >> r.grid.n >> r.grid.x_min >> r.grid.x_max >> r.hbar >> r.mass >> r.t;
  if (magic != "qcc-density" || !hs) throw std::runtime_error(path + ": not a density snapshot");
  r.rho.resize(r.grid.n, r.grid.n);
  in.read(reinterpret_cast<char*>(r.rho.data()), static_cast<std::streamsize>(sizeof(cplx) * r.rho.size()));
  if (!in) throw std::runtime_error(path + ": truncated snapshot");
  return r;
}

}  // namespace qcc
