#pragma once

// Euler-Maruyama ensembles for dx = (p/m) dt + sqrt(D_x dt) xi_1,
// dp = -grad V dt + sqrt(D_p dt) xi_2, in any dimension.

#include <cstdint>
#include <string>

#include "qcc/linalg.hpp"
#include "qcc/potentials.hpp"
#include "qcc/scales.hpp"

namespace qcc {

struct LangevinEnsemble {
  Mat samples;  // one row per sample: (x_1..x_d, p_1..p_d)
  std::uint64_t seed = 0;
  long steps_taken = 0;
  double t = 0.0;

  int dims() const { return static_cast<int>(samples.cols() / 2); }
  Vec mean() const;
  Mat covariance() const;
};

/// M independent draws from N(mean, cov) on the keyed stream of `seed`.
LangevinEnsemble sample_gaussian_ensemble(long count, const Vec& mean, const Mat& cov, std::uint64_t seed);

/// Advances every sample by ceil(T/dt) steps. Sample s at global step n
/// draws from stream (seed, s, n), so results do not depend on threading.
LangevinEnsemble evolve_langevin_ensemble(const LangevinEnsemble& ens, const HamiltonianModel& model,
                                          const DiffusionSpec& diffusion, double T, double dt);

/// Text header "qcc-ensemble M 2d seed steps t" then row-major doubles.
void write_ensemble(const LangevinEnsemble& ens, const std::string& path);

}  // namespace qcc
