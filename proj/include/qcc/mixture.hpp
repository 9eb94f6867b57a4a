#pragma once

// The Gaussian-mixture trajectory as a weighted particle ensemble over
// (alpha, sigma). Each particle's covariance follows the purity-preserving
// drift S_Z; the broadening S_D is realised as random kicks of the centre.
//
// Whitened quantities (suffix _tilde) use W = sigma_star^{-1/2}:
// sigma_tilde = W sigma W, F_tilde = W F W^{-1}, D_tilde = W D W.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qcc/gaussian.hpp"
#include "qcc/lindblad.hpp"
#include "qcc/phase_field.hpp"
#include "qcc/potentials.hpp"
#include "qcc/rng.hpp"
#include "qcc/scales.hpp"

namespace qcc {

/// stochastic: the centre receives a Gaussian kick with the step's S_D
/// covariance. cloud: the kick distribution is carried analytically as a
/// spread matrix and only partially sampled once it exceeds `collapse_cap`.
enum class KickMode { stochastic, cloud };

std::string to_string(KickMode k);
KickMode kick_mode_from_string(const std::string& name);

struct MixtureSettings {
  KickMode kick = KickMode::stochastic;
  /// Cloud mode: largest whitened eigenvalue of the spread before a partial
  /// collapse; collapsed directions are reset to collapse_cap / 2.
  double collapse_cap = 1.0;
  /// Largest tolerated overshoot of the squeeze window before clamping.
  double nts_tol = 1e-6;
  /// Kick-covariance eigenvalues in [-noise_clip, 0) are set to zero.
  double noise_clip = 1e-9;
  /// Symplectic defect above which sigma is re-projected.
  double projection_tol = 1e-10;
};

struct MixtureParticle {
  double weight = 1.0;
  GaussianState state;
  Mat spread;  // cloud-mode spread of the centre; zero in stochastic mode
};

struct MixtureDiagnostics {
  double max_squeeze = 1.0;
  double max_defect_before = 0.0;   // before re-projection
  double max_defect_after = 0.0;
  double max_projection_shift = 0.0;
  double max_nts_excess = 0.0;      // before clamping
  double max_noise_clip = 0.0;      // most negative clipped kick eigenvalue (magnitude)
  long projections = 0;
  long collapses = 0;
  long domain_exits = 0;

  void merge(const MixtureDiagnostics& o);
};

struct MixtureEnsemble {
  std::vector<MixtureParticle> particles;
  ScaleReport scales;
  double z = 1.0;                 // squeeze bound in force
  bool bound_applicable = true;   // false when z comes from a user cap
  std::uint64_t seed = 0;
  long steps_taken = 0;
  double t = 0.0;
  MixtureDiagnostics diagnostics;

  int dims() const { return particles.empty() ? 0 : particles.front().state.dims(); }
  double total_weight() const;
};

/// W = sigma_star^{-1/2}.
Mat whitening(const ScaleReport& scales);

/// M(sigma_tilde) = k (sigma_tilde - sigma_tilde^{-1}) / (1 - z_eff^{-2}) with
/// k = scales.diffusion_rate and z_eff = max(z, 1 + 1e-6).
Mat m_matrix(const Mat& sigma_tilde, const ScaleReport& scales, double z);

struct SdotSplit {
  Mat s_z, s_d;              // physical coordinates
  Mat s_z_tilde, s_d_tilde;  // whitened
  Mat sigma_tilde;
  Mat m;
};

/// S_Z and S_D at (alpha, sigma). Throws if sigma is not pure or violates the
/// squeeze window by more than 1e-8.
SdotSplit split_sdot(const Vec& alpha, const Mat& sigma, const HamiltonianModel& model, const DiffusionSpec& diffusion,
                     const ScaleReport& scales, double z);

/// max |(sigma_tilde^{-1} S)^T + Omega^T sigma_tilde^{-1} S Omega|.
double tangency_defect(const Mat& sigma_tilde, const Mat& s_z_tilde);

/// Builds an ensemble of `copies` equal-weight replicas of each listed
/// (weight, state), validating purity and the squeeze window at the z in
/// force. Throws when z is unbounded and no cap is given.
MixtureEnsemble make_ensemble(const std::vector<std::pair<double, GaussianState>>& components, int copies,
                              const ScaleReport& scales, std::optional<double> z_cap, std::uint64_t seed);

/// One step of one particle. `index` selects the particle's random stream.
MixtureParticle step_particle(const MixtureParticle& particle, const HamiltonianModel& model,
                              const DiffusionSpec& diffusion, const ScaleReport& scales, double z, double dt,
                              const MixtureSettings& settings, KeyedNormal& rng, MixtureDiagnostics& diag,
                              long step_index = 0);

using MixtureObserver = std::function<void(const MixtureEnsemble&)>;

/// Snapshots at t = k T / snapshots. Requires dt <= tau_H / 100.
std::vector<MixtureEnsemble> evolve_mixture(const MixtureEnsemble& ens, const HamiltonianModel& model,
                                            const DiffusionSpec& diffusion, double T, double dt,
                                            const MixtureSettings& settings = {}, int snapshots = 10,
                                            const MixtureObserver& observer = nullptr);

/// rho_tilde = sum_i w_i tau(alpha_i, sigma_i + spread_i) on a d = 1 grid.
/// Throws if the trace misses the total weight by more than coverage_tol.
DensityMatrixGrid mixture_to_density_grid(const MixtureEnsemble& ens, const QuantumGrid& grid, double mass,
                                          double coverage_tol = 1e-6);

/// sum_i w_i N(alpha_i, sigma_i + spread_i) on a phase grid. Throws if the
/// mass misses the total weight by more than coverage_tol.
PhaseField mixture_to_phase_field(const MixtureEnsemble& ens, const PhaseGrid& grid,
                                  Sampling sampling = Sampling::cell_average, double coverage_tol = 1e-6);

/// Rows: weight, alpha, sigma upper triangle, squeeze ratio, then the spread
/// upper triangle in cloud mode.
void write_ensemble_csv(const MixtureEnsemble& ens, const std::string& path);

/// Short key = value report of the ensemble diagnostics.
std::string summary(const MixtureEnsemble& ens);

}  // namespace qcc
