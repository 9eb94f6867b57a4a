#include "qcc/harmonic_error.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace qcc {

namespace {

double xx_norm(const Mat& sigma, int d) {
  return max_eigenvalue(symmetrize(sigma.topLeftCorner(d, d)));
}

}  // namespace

double lemma_bound_quantum(const Mat& sigma, const HamiltonianModel& model, double hbar, int d) {
  if (!(hbar > 0.0)) throw std::invalid_argument("lemma_bound_quantum: hbar must be positive");
  return std::sqrt(5.0 * d * d * d / 3.0) * model.sup3 * std::pow(xx_norm(sigma, d), 1.5) / hbar;
}

double lemma_bound_classical(const Mat& sigma, const HamiltonianModel& model, double hbar, int d) {
  if (!(hbar > 0.0)) throw std::invalid_argument("lemma_bound_classical: hbar must be positive");
  return std::sqrt(3.0 * d * d * d) * model.sup3 * std::pow(xx_norm(sigma, d), 1.5) / hbar;
}

double numeric_harmonic_error_quantum(const Vec& alpha, const Mat& sigma, const HamiltonianModel& model, double hbar,
                                      const QuantumGrid& grid) {
  if (model.dims != 1) throw std::invalid_argument("numeric_harmonic_error_quantum: d must be 1");
  const DensityMatrixGrid tau = gaussian_to_grid(GaussianState{alpha, sigma, hbar}, grid, model.mass);
  const QuadraticExpansion q = harmonic_expansion(model, alpha.head(1));
  const int n = grid.n;
  Vec dv(n);
  for (int i = 0; i < n; ++i) {
    Vec x(1);
    x[0] = grid.x(i);
    dv[i] = model.value(x) - q(x);
  }
  // -(i/hbar)[dV, tau] is Hermitian.
  CMat c(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) c(i, j) = cplx(0.0, -1.0 / hbar) * (dv[i] - dv[j]) * tau.rho(i, j);
  }
  Eigen::SelfAdjointEigenSolver<CMat> es(c, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

double numeric_harmonic_error_classical(const Vec& alpha, const Mat& sigma, const HamiltonianModel& model,
                                        const PhaseGrid& grid) {
  if (model.dims != 1) throw std::invalid_argument("numeric_harmonic_error_classical: d must be 1");
  grid.validate();
  const Mat inv = sigma.inverse();
  const double norm = 1.0 / (2.0 * std::numbers::pi * std::sqrt(sigma.determinant()));
  const double a = alpha[0];
  const double g1 = model.potential.dv(a), g2 = model.potential.d2v(a);
  double total = 0.0;
  for (int i = 0; i < grid.nx; ++i) {
    const double x = grid.x(i);
    const double ddv = model.potential.dv(x) - g1 - g2 * (x - a);
    for (int j = 0; j < grid.np; ++j) {
      Vec beta(2);
      beta << x - alpha[0], grid.p(j) - alpha[1];
      const Vec ib = inv * beta;
      const double tau = norm * std::exp(-0.5 * beta.dot(ib));
      total += std::abs(ib[1] * tau * ddv);
    }
  }
  return total * grid.cell_area();
}

QuantumGrid covering_quantum_grid(const Vec& alpha, const Mat& sigma, double hbar, int n, double reach) {
  const double half = reach * std::sqrt(sigma(0, 0));
  const double p_reach = std::abs(alpha[1]) + 6.0 * std::sqrt(sigma(1, 1));
  if (2.0 * half / n > std::numbers::pi * hbar / p_reach) {
    throw std::invalid_argument("covering_quantum_grid: n too small to resolve the momentum spread");
  }
  return QuantumGrid{n, alpha[0] - half, alpha[0] + half};
}

PhaseGrid covering_phase_grid(const Vec& alpha, const Mat& sigma, int n, double reach) {
  const double hx = reach * std::sqrt(sigma(0, 0)), hp = reach * std::sqrt(sigma(1, 1));
  return PhaseGrid{n, n, alpha[0] - hx, alpha[0] + hx, alpha[1] - hp, alpha[1] + hp};
}

HarmonicErrorReport harmonic_error_report(const Vec& alpha, const Mat& sigma, const HamiltonianModel& model, double hbar,
                                          int n) {
  HarmonicErrorReport r{alpha, sigma, hbar, model.dims};
  r.bound_quantum = lemma_bound_quantum(sigma, model, hbar, model.dims);
  r.bound_classical = lemma_bound_classical(sigma, model, hbar, model.dims);
  if (model.dims == 1) {
    r.numeric_quantum = numeric_harmonic_error_quantum(alpha, sigma, model, hbar, covering_quantum_grid(alpha, sigma, hbar, n));
    r.numeric_classical = numeric_harmonic_error_classical(alpha, sigma, model, covering_phase_grid(alpha, sigma, n));
  }
  return r;
}

void write_harmonic_error_csv(const std::vector<HarmonicErrorReport>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.precision(12);
  out << "alpha_x,alpha_p,sigma_xx,sigma_xp,sigma_pp,hbar,bound_quantum,bound_classical,numeric_quantum,"
         "numeric_classical,ratio_quantum,ratio_classical\n";
  for (const auto& r : rows) {
    out << r.alpha[0] << ',' << r.alpha[r.dims] << ',' << r.sigma(0, 0) << ',' << r.sigma(0, r.dims) << ','
        << r.sigma(r.dims, r.dims) << ',' << r.hbar << ',' << r.bound_quantum << ',' << r.bound_classical << ','
        << r.numeric_quantum << ',' << r.numeric_classical << ',' << r.ratio_quantum() << ',' << r.ratio_classical()
        << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace qcc
