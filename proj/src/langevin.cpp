#include "qcc/langevin.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "qcc/rng.hpp"

namespace qcc {

Vec LangevinEnsemble::mean() const { return samples.colwise().mean().transpose(); }

Mat LangevinEnsemble::covariance() const {
  const Mat centered = samples.rowwise() - samples.colwise().mean();
  return centered.transpose() * centered / static_cast<double>(samples.rows() - 1);
}

LangevinEnsemble sample_gaussian_ensemble(long count, const Vec& mean, const Mat& cov, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample_gaussian_ensemble: count must be positive");
  if (cov.rows() != mean.size() || cov.cols() != mean.size()) throw std::invalid_argument("sample_gaussian_ensemble: shape");
  Eigen::LLT<Mat> llt(cov);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("sample_gaussian_ensemble: covariance not positive definite");
  const Mat l = llt.matrixL();
  const Eigen::Index n = mean.size();
  LangevinEnsemble ens;
  ens.seed = seed;
  ens.samples.resize(count, n);
  // Initial draws use a step index no evolution step can reach.
  constexpr std::uint64_t kInitStep = std::numeric_limits<std::uint64_t>::max();
#pragma omp parallel for schedule(static)
  for (long s = 0; s < count; ++s) {
    KeyedNormal rng(seed, static_cast<std::uint64_t>(s), kInitStep);
    Vec z(n);
    for (Eigen::Index k = 0; k < n; ++k) z[k] = rng();
    ens.samples.row(s) = (mean + l * z).transpose();
  }
  return ens;
}

LangevinEnsemble evolve_langevin_ensemble(const LangevinEnsemble& ens, const HamiltonianModel& model,
                                          const DiffusionSpec& diffusion, double T, double dt) {
  diffusion.validate();
  if (!(T >= 0.0) || !(dt > 0.0)) throw std::invalid_argument("evolve_langevin_ensemble: bad T/dt");
  const int d = ens.dims();
  if (d != model.dims) throw std::invalid_argument("evolve_langevin_ensemble: dimension mismatch");
  const long steps = static_cast<long>(std::ceil(T / dt - 1e-12));
  const double h = steps > 0 ? T / steps : 0.0;
  const double sx = std::sqrt(diffusion.position * h), sp = std::sqrt(diffusion.momentum * h);
  LangevinEnsemble out = ens;
  const long count = out.samples.rows();
#pragma omp parallel for schedule(static)
  for (long s = 0; s < count; ++s) {
    Vec z = out.samples.row(s).transpose();
    for (long n = 0; n < steps; ++n) {
      KeyedNormal rng(ens.seed, static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(ens.steps_taken + n));
      const Vec x = z.head(d);
      const Vec grad = model.gradient(x);
      for (int k = 0; k < d; ++k) {
        const double xi1 = rng(), xi2 = rng();
        z[k] += z[d + k] / model.mass * h + sx * xi1;
        z[d + k] += -grad[k] * h + sp * xi2;
      }
    }
    out.samples.row(s) = z.transpose();
  }
  out.steps_taken += steps;
  out.t += steps * h;
  return out;
}

void write_ensemble(const LangevinEnsemble& ens, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.precision(17);
  out << "qcc-ensemble " << ens.samples.rows() << ' ' << ens.samples.cols() << ' ' << ens.seed << ' ' << ens.steps_taken
      << ' ' << ens.t << '\n';
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = ens.samples;
  out.write(reinterpret_cast<const char*>(rows.data()), static_cast<std::streamsize>(sizeof(double) * rows.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace qcc
