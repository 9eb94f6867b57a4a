#pragma once

// Gaussian states on phase space R^{2d} (x-block then p-block) and the
// symplectic facts the mixture construction relies on.

#include <random>
#include <utility>
#include <vector>

#include "qcc/linalg.hpp"

namespace qcc {

struct GaussianState {
  Vec mean;  // (x_1..x_d, p_1..p_d)
  Mat cov;
  double hbar = 1.0;

  int dims() const { return static_cast<int>(mean.size() / 2); }
};

/// max |(2 cov/hbar)^T Omega (2 cov/hbar) - Omega|.
double symplectic_defect(const Mat& cov, double hbar);

/// True iff 2 cov / hbar is symplectic to `tol`. Rejects non-symmetric input.
bool is_pure_gaussian(const Mat& cov, double hbar, double tol = 1e-8);

/// Spectrum of sigma_star^{-1/2} cov sigma_star^{-1/2}, ascending.
Vec whitened_spectrum(const Mat& cov, const Mat& sigma_star);

/// max(lambda_max, 1/lambda_min) of the whitened covariance.
double squeeze_ratio(const Mat& cov, const Mat& sigma_star);

/// z^{-1} sigma_star <= cov <= z sigma_star, tested on the whitened spectrum
/// with `tol` absolute slack on eigenvalues.
bool nts_check(const Mat& cov, const Mat& sigma_star, double z, double tol = 1e-9);
bool nts_upper(const Mat& cov, const Mat& sigma_star, double z, double tol = 1e-9);
bool nts_lower(const Mat& cov, const Mat& sigma_star, double z, double tol = 1e-9);

/// Eigenvalues matched smallest-with-largest so that each product is (hbar/2)^2.
/// Throws if any pair misses by more than rel_tol, naming the worst pair.
std::vector<std::pair<double, double>> covariance_eigen_pairs(const Mat& cov, double hbar, double rel_tol = 1e-8);

/// <b^T A b> = Tr[cov A].
double gaussian_moment(const Mat& cov, const Mat& a);
/// <(b^T A b)(b^T B b)> = Tr[cov A] Tr[cov B] + 2 Tr[cov A cov B].
double gaussian_moment4(const Mat& cov, const Mat& a, const Mat& b);
/// Six-factor Wick contraction for <(b^T A b)(b^T B b)(b^T C b)>.
double gaussian_moment6(const Mat& cov, const Mat& a, const Mat& b, const Mat& c);

/// Phase-space Gaussian density at a point.
double gaussian_density(const GaussianState& s, const Vec& point);

/// Max over a probe lattice of |d_a d_b tau - 2 d tau / d sigma_ab|, both sides by
/// central differences with step h. sigma_ab is perturbed as an independent entry.
double gaussian_derivative_residual(const GaussianState& s, int a, int b, double h);

/// False (with a message on stderr) when halving h fails to shrink the residual.
bool derivative_residual_converges(const GaussianState& s, int a, int b, double h);

/// exp(Omega S) for a random symmetric S with entries ~ N(0, scale^2).
Mat random_symplectic(int d, std::mt19937_64& rng, double scale);

/// S sigma_star S^T with S random symplectic, shrunk until squeeze_ratio <= z.
Mat random_pure_nts_covariance(const Mat& sigma_star, double z, std::mt19937_64& rng, double scale = 1.0);

}  // namespace qcc
