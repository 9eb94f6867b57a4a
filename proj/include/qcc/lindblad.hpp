#pragma once

// Density-matrix dynamics for d = 1 on a uniform periodic position grid.
//
// Matrix entries are stored weighted by the grid spacing,
// rho(i, j) = dx * rho(x_i, x_j), so the trace is the plain diagonal sum and
// the eigenvalues are those of the operator. The kinetic term and the
// momentum dissipator act through the discrete Fourier transform.

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "qcc/gaussian.hpp"
#include "qcc/linalg.hpp"
#include "qcc/phase_field.hpp"
#include "qcc/potentials.hpp"
#include "qcc/scales.hpp"

namespace qcc {

struct QuantumGrid {
  int n = 256;
  double x_min = -10.0;
  double x_max = 10.0;

  double dx() const { return (x_max - x_min) / n; }
  double x(int i) const { return x_min + i * dx(); }
  /// Wavenumber of FFT index a, in [-pi/dx, pi/dx).
  double k(int a) const;
  Vec points() const;
  bool same_as(const QuantumGrid& o) const { return n == o.n && x_min == o.x_min && x_max == o.x_max; }
  void validate() const;
};

struct GridMoments {
  double mean_x = 0.0, mean_p = 0.0;
  double var_x = 0.0, var_p = 0.0, cov_xp = 0.0;
};

struct DensityMatrixGrid {
  QuantumGrid grid;
  double hbar = 1.0;
  double mass = 1.0;
  double t = 0.0;
  CMat rho;

  double trace() const { return rho.trace().real(); }
  double hermiticity_error() const;
  double min_eigenvalue() const;
  double purity() const;
  /// Position moments from the diagonal; momentum moments through the
  /// spectral derivative.
  GridMoments moments() const;
  /// Throws SolverAbort if trace, Hermiticity or positivity fail.
  void check_invariants(long step, bool check_positivity = true) const;
};

/// Pure-state realisation of a Gaussian with d = 1. Throws if the state is
/// not pure or if the grid does not cover mean +- 6 standard deviations in x
/// and in p.
DensityMatrixGrid gaussian_to_grid(const GaussianState& state, const QuantumGrid& grid, double mass);

/// Adds weight * (Gaussian with the given mean and covariance) to rho. The
/// covariance may be mixed. Entries below exp(-40) of the peak are skipped.
void add_gaussian_to_grid(CMat& rho, const QuantumGrid& grid, double hbar, double weight, const Vec& mean,
                          const Mat& cov);

/// Holds FFTW plans and scratch space for repeated applications of the
/// generator on one grid.
class LindbladSolver {
 public:
  LindbladSolver(const QuantumGrid& grid, const HamiltonianModel& model, const DiffusionSpec& diffusion);
  ~LindbladSolver();
  LindbladSolver(const LindbladSolver&) = delete;
  LindbladSolver& operator=(const LindbladSolver&) = delete;

  /// The generator applied to rho.
  void rhs(const CMat& rho, CMat& out);
  /// One classical RK4 step.
  void step(CMat& rho, double dt);
  /// One Strang step exp(L_x dt/2) exp(L_p dt) exp(L_x dt/2), where L_x holds
  /// the potential and position-diagonal dissipator and L_p the kinetic term
  /// and momentum-diagonal dissipator. Each factor is completely positive.
  void split_step(CMat& rho, double dt);
  /// Largest dt inside the RK4 stability region for this generator.
  double max_stable_dt() const;
  /// Probability within the outer 2.5% of the position grid plus that in the
  /// outer 2.5% of the momentum grid.
  double edge_mass(const CMat& rho);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

CMat apply_lindbladian(const DensityMatrixGrid& rho, const HamiltonianModel& model, const DiffusionSpec& diffusion);

/// rk4: classical Runge-Kutta on the full generator, bounded by
/// max_stable_dt. split: second-order operator splitting, no step limit.
enum class LindbladMethod { rk4, split };

std::string to_string(LindbladMethod m);
LindbladMethod lindblad_method_from_string(const std::string& name);

struct LindbladOptions {
  int snapshots = 10;  // equally spaced in (0, T], plus the initial state
  bool check_positivity = true;
  double edge_tol = 1e-6;
  LindbladMethod method = LindbladMethod::rk4;
};

using DensityObserver = std::function<void(const DensityMatrixGrid&)>;

/// Evolves to T with steps no longer than dt (rounded so that snapshots fall
/// on steps). Each snapshot is checked and passed to the observer when given;
/// otherwise all snapshots are returned.
std::vector<DensityMatrixGrid> evolve_lindblad(const DensityMatrixGrid& rho0, const HamiltonianModel& model,
                                               const DiffusionSpec& diffusion, double T, double dt,
                                               const LindbladOptions& options = {},
                                               const DensityObserver& observer = nullptr);

/// Wigner function on x = grid points and 2n momenta spaced pi hbar/(n dx),
/// computed from a two-fold Fourier interpolation of rho.
PhaseField wigner_transform_grid(const DensityMatrixGrid& rho);

/// Sum of |eigenvalues| of rho1 - rho2.
double trace_distance(const DensityMatrixGrid& rho1, const DensityMatrixGrid& rho2);
double trace_distance(const CMat& rho1, const CMat& rho2);

/// Text header line "qcc-density N x_min x_max hbar mass t" then N*N complex
/// doubles in column-major order.
void write_snapshot(const DensityMatrixGrid& rho, const std::string& path);
DensityMatrixGrid read_snapshot(const std::string& path);

}  // namespace qcc
