#pragma once

// Characteristic scales of H = p^2/2m + V(x) and the correspondence-error
// budget that follows from them.
//
// Infinite quantities (harmonic potentials have no anharmonic action; zero
// diffusion gives an unbounded squeeze factor) are carried as empty
// std::optional values, never as floating-point infinities.

#include <optional>
#include <stdexcept>

#include "qcc/linalg.hpp"
#include "qcc/potentials.hpp"

namespace qcc {

inline constexpr double kHbarSI = 1.054571817e-34;  // J s

/// Isotropic phase-space diffusion: position rate D_x = hbar |l_p|^2 and
/// momentum rate D_p = hbar |l_x|^2. Only the moduli of the Lindblad
/// amplitudes enter.
struct DiffusionSpec {
  double position = 0.0;  // D_x [length^2 / time]
  double momentum = 0.0;  // D_p [momentum^2 / time]
  double hbar = 1.0;

  void validate() const;
  /// diag(D_x I_d, D_p I_d).
  Mat matrix(int d) const;
};

struct ScaleReport {
  int dims = 1;
  double hbar = 1.0;
  double tau_H = 0.0;
  double a_H = 0.0;
  std::optional<double> s_H;  // empty when sup3 == 0
  std::optional<double> x_H;
  std::optional<double> p_H;
  double D0 = 0.0;
  /// Whitened diffusion rate k = D0 s_H / (hbar tau_H) = min(D_x a_H, D_p / a_H) / hbar.
  /// Finite even for harmonic potentials.
  double diffusion_rate = 0.0;
  std::optional<double> z;  // empty when diffusion_rate == 0
  Mat sigma_star;           // coherent covariance (hbar/2) diag(I/a_H, a_H I)
  std::optional<double> lyapunov;

  /// hbar / s_H, zero for harmonic potentials.
  double hbar_over_s() const { return s_H ? hbar / *s_H : 0.0; }
  /// The squeeze bound in force: z when finite, else the cap. Throws if neither.
  double z_in_force(std::optional<double> z_cap = std::nullopt) const;
};

ScaleReport compute_scales(const HamiltonianModel& model, const DiffusionSpec& diffusion);

/// Appendix F heuristic: D_x,eff = D_p / (sup2 m). Returns a copy of the
/// diffusion spec with that position rate.
DiffusionSpec with_effective_position_diffusion(const HamiltonianModel& model, const DiffusionSpec& diffusion);

/// d^{3/2} (t/tau_H) sqrt(hbar/s_H) z^{3/2} in terms of the dimensionless inputs.
double correspondence_error(double t_over_tau, double hbar_over_s, double D0, int d);

/// The error budget epsilon(t). Zero at t = 0 and for harmonic potentials.
/// When z is unbounded a z_cap must be supplied.
double theorem_epsilon(const ScaleReport& scales, double t, int d, std::optional<double> z_cap = std::nullopt);

class BelowFloorError : public std::invalid_argument {
 public:
  BelowFloorError(double epsilon, double floor);
  double floor() const noexcept { return floor_; }

 private:
  double floor_;
};

/// Smallest D0 for which the budget at time t equals epsilon. Throws
/// BelowFloorError if epsilon is below d^{3/2}(t/tau_H)sqrt(hbar/s_H).
double diffusion_threshold(const ScaleReport& scales, double epsilon, double t, int d);

/// lambda^{-1} log(s/hbar). Throws if s <= hbar.
double ehrenfest_time(double lyapunov, double action_scale, double hbar);

/// lambda^{-1} sqrt(s/hbar), the horizon reached by the correspondence bound.
double correspondence_horizon(double lyapunov, double action_scale, double hbar);

/// hbar v^{-7/2} m^{-1} Lambda^{3/2} s^{9/2}: the time for which the bound
/// stays small for a particle with speed v in a potential varying on length s,
/// decohered at localisation rate Lambda.
double physical_example_time(double mass, double velocity, double length_scale, double localization_rate,
                             double hbar = kHbarSI);

}  // namespace qcc
