#pragma once

// Frictionless Fokker-Planck dynamics for d = 1,
//   df/dt = -(p/m) df/dx + V'(x) df/dp + (D_x/2) d2f/dx2 + (D_p/2) d2f/dp2.

#include <functional>
#include <memory>
#include <vector>

#include "qcc/phase_field.hpp"
#include "qcc/potentials.hpp"
#include "qcc/scales.hpp"

namespace qcc {

/// finite_volume: flux-limited (MC) Lax-Wendroff advection with outflow
/// boundaries, values are cell averages. spectral: exact Fourier shifts on a
/// periodic box, values are point samples at cell centres.
enum class FpScheme { finite_volume, spectral };

std::string to_string(FpScheme s);
FpScheme fp_scheme_from_string(const std::string& name);

class FokkerPlanckSolver {
 public:
  FokkerPlanckSolver(const PhaseGrid& grid, const HamiltonianModel& model, const DiffusionSpec& diffusion,
                     FpScheme scheme);
  ~FokkerPlanckSolver();
  FokkerPlanckSolver(const FokkerPlanckSolver&) = delete;
  FokkerPlanckSolver& operator=(const FokkerPlanckSolver&) = delete;

  /// Strang step: diffusion dt/2, advection x dt/2, p dt, x dt/2, diffusion dt/2.
  void step(PhaseField& f, double dt);
  /// Largest dt satisfying the advection and diffusion CFL limits (finite
  /// volume), or infinity for the spectral scheme.
  double max_stable_dt() const;
  /// Mass lost through the boundary so far (finite volume), or the current
  /// mass in the two outermost cells of each edge (spectral).
  double leaked_mass() const { return leaked_; }
  FpScheme scheme() const { return scheme_; }

 private:
  struct Impl;
  void advect_x(PhaseField& f, double dt);
  void advect_p(PhaseField& f, double dt);
  void diffuse(PhaseField& f, double dt);
  void spectral_x(PhaseField& f, double dt);
  void spectral_p(PhaseField& f, double dt);

  PhaseGrid grid_;
  double mass_;
  DiffusionSpec diffusion_;
  FpScheme scheme_;
  Vec force_;  // -V'(x_i)
  double leaked_ = 0.0;
  std::unique_ptr<Impl> impl_;
};

struct FokkerPlanckOptions {
  FpScheme scheme = FpScheme::finite_volume;
  int snapshots = 10;
  double leak_tol = 1e-4;
};

using FieldObserver = std::function<void(const PhaseField&, double t)>;

/// Snapshots at t = k T / snapshots, k = 0..snapshots. Rejects a dt above the
/// CFL limit with the suggested value in the message; aborts if the boundary
/// leak exceeds leak_tol.
std::vector<PhaseField> evolve_fokker_planck(const PhaseField& f0, const HamiltonianModel& model,
                                             const DiffusionSpec& diffusion, double T, double dt,
                                             const FokkerPlanckOptions& options = {},
                                             const FieldObserver& observer = nullptr);

}  // namespace qcc
