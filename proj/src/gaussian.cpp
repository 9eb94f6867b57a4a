#include "qcc/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace qcc {

double symplectic_defect(const Mat& cov, double hbar) {
  const int d = static_cast<int>(cov.rows() / 2);
  const Mat a = (2.0 / hbar) * cov;
  const Mat omega = symplectic_form(d);
  return max_abs(a.transpose() * omega * a - omega);
}

bool is_pure_gaussian(const Mat& cov, double hbar, double tol) {
  if (cov.rows() != cov.cols() || cov.rows() % 2 != 0) throw std::invalid_argument("is_pure_gaussian: bad shape");
  if (!is_symmetric(cov, 1e-12)) throw std::invalid_argument("is_pure_gaussian: covariance is not symmetric");
  return symplectic_defect(cov, hbar) <= tol;
}

Vec whitened_spectrum(const Mat& cov, const Mat& sigma_star) {
  const Mat w = sym_inv_sqrt(sigma_star);
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(w * cov * w), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double squeeze_ratio(const Mat& cov, const Mat& sigma_star) {
  const Vec lam = whitened_spectrum(cov, sigma_star);
  return std::max(lam.maxCoeff(), 1.0 / lam.minCoeff());
}

bool nts_upper(const Mat& cov, const Mat& sigma_star, double z, double tol) {
  return whitened_spectrum(cov, sigma_star).maxCoeff() <= z + tol;
}

bool nts_lower(const Mat& cov, const Mat& sigma_star, double z, double tol) {
  return whitened_spectrum(cov, sigma_star).minCoeff() >= 1.0 / z - tol;
}

bool nts_check(const Mat& cov, const Mat& sigma_star, double z, double tol) {
  if (!(z >= 1.0)) throw std::invalid_argument("nts_check: z must be >= 1");
  const Vec lam = whitened_spectrum(cov, sigma_star);
  return lam.minCoeff() >= 1.0 / z - tol && lam.maxCoeff() <= z + tol;
}

std::vector<std::pair<double, double>> covariance_eigen_pairs(const Mat& cov, double hbar, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(cov), Eigen::EigenvaluesOnly);
  const Vec lam = es.eigenvalues();
  const Eigen::Index n = lam.size();
  const double target = 0.25 * hbar * hbar;
  std::vector<std::pair<double, double>> pairs;
  double worst = 0.0;
  Eigen::Index worst_i = 0;
  for (Eigen::Index i = 0; i < n / 2; ++i) {
    pairs.emplace_back(lam[i], lam[n - 1 - i]);
    const double miss = std::abs(lam[i] * lam[n - 1 - i] / target - 1.0);
    if (miss > worst) {
      worst = miss;
      worst_i = i;
    }
  }
  if (worst > rel_tol) {
    std::ostringstream msg;
    msg << "covariance is not pure: eigenvalue " << lam[worst_i] << " pairs with " << lam[n - 1 - worst_i]
        << " (product off by relative " << worst << ")";
    throw std::invalid_argument(msg.str());
  }
  return pairs;
}

namespace {

void check_square(const Mat& cov, const Mat& m) {
  if (m.rows() != cov.rows() || m.cols() != cov.cols()) throw std::invalid_argument("gaussian moment: dimension mismatch");
}

}  // namespace

double gaussian_moment(const Mat& cov, const Mat& a) {
  check_square(cov, a);
  return (cov * a).trace();
}

double gaussian_moment4(const Mat& cov, const Mat& a, const Mat& b) {
  check_square(cov, a);
  check_square(cov, b);
  const Mat sa = cov * a;
  const Mat sb = cov * b;
  return sa.trace() * sb.trace() + 2.0 * (sa * sb).trace();
}

double gaussian_moment6(const Mat& cov, const Mat& a, const Mat& b, const Mat& c) {
  check_square(cov, a);
  check_square(cov, b);
  check_square(cov, c);
  const Mat sa = cov * a;
  const Mat sb = cov * b;
  const Mat sc = cov * c;
  const double ta = sa.trace(), tb = sb.trace(), tc = sc.trace();
  return ta * tb * tc + 2.0 * ta * (sb * sc).trace() + 2.0 * tb * (sc * sa).trace() + 2.0 * tc * (sb * sa).trace() +
         8.0 * (sa * sb * sc).trace();
}

namespace {

// Density with an arbitrary invertible (possibly non-symmetric) matrix in place of sigma.
double density_general(const Mat& sigma, const Vec& beta) {
  const int d = static_cast<int>(beta.size() / 2);
  Eigen::PartialPivLU<Mat> lu(sigma);
  const double q = beta.dot(lu.solve(beta));
  return std::exp(-0.5 * q) / (std::pow(2.0 * std::numbers::pi, d) * std::sqrt(lu.determinant()));
}

}  // namespace

double gaussian_density(const GaussianState& s, const Vec& point) { return density_general(s.cov, point - s.mean); }

double gaussian_derivative_residual(const GaussianState& s, int a, int b, double h) {
  const Eigen::Index n = s.mean.size();
  if (a < 0 || b < 0 || a >= n || b >= n) throw std::invalid_argument("gaussian_derivative_residual: bad index");
  if (n > 6) throw std::invalid_argument("gaussian_derivative_residual: probe lattice limited to d <= 3");
  const double hs = h * std::sqrt(min_eigenvalue(s.cov));

  long count = 1;
  for (Eigen::Index k = 0; k < n; ++k) count *= 3;
  double worst = 0.0;
  for (long code = 0; code < count; ++code) {
    Vec beta(n);
    long c = code;
    for (Eigen::Index k = 0; k < n; ++k) {
      beta[k] = static_cast<double>(c % 3 - 1) * std::sqrt(s.cov(k, k));
      c /= 3;
    }
    auto tau = [&](const Vec& bb) { return density_general(s.cov, bb); };
    Vec ea = Vec::Zero(n), eb = Vec::Zero(n);
    ea[a] = h;
    eb[b] = h;
    double d2;
    if (a == b) {
      d2 = (tau(beta + ea) - 2.0 * tau(beta) + tau(beta - ea)) / (h * h);
    } else {
      d2 = (tau(beta + ea + eb) - tau(beta + ea - eb) - tau(beta - ea + eb) + tau(beta - ea - eb)) / (4.0 * h * h);
    }
    Mat sp = s.cov, sm = s.cov;
    sp(a, b) += hs;
    sm(a, b) -= hs;
    const double dsig = (density_general(sp, beta) - density_general(sm, beta)) / (2.0 * hs);
    worst = std::max(worst, std::abs(d2 - 2.0 * dsig));
  }
  return worst;
}

bool derivative_residual_converges(const GaussianState& s, int a, int b, double h) {
  const double r1 = gaussian_derivative_residual(s, a, b, h);
  const double r2 = gaussian_derivative_residual(s, a, b, 0.5 * h);
  // Residuals at round-off level cannot shrink further; treat them as converged.
  if (r1 < 1e-12 || r2 < 0.5 * r1) return true;
  std::cerr << "warning: derivative residual not decreasing (h=" << h << ": " << r1 << ", h/2: " << r2
            << "); step too large\n";
  return false;
}

Mat random_symplectic(int d, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  Mat s(2 * d, 2 * d);
  for (int i = 0; i < 2 * d; ++i) {
    for (int j = i; j < 2 * d; ++j) s(i, j) = s(j, i) = normal(rng);
  }
  return expm(symplectic_form(d) * s);
}

Mat random_pure_nts_covariance(const Mat& sigma_star, double z, std::mt19937_64& rng, double scale) {
  const int d = static_cast<int>(sigma_star.rows() / 2);
  std::normal_distribution<double> normal(0.0, scale);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Mat gen(2 * d, 2 * d);
  for (int i = 0; i < 2 * d; ++i) {
    for (int j = i; j < 2 * d; ++j) gen(i, j) = gen(j, i) = normal(rng);
  }
  gen = symplectic_form(d) * gen;
  // Whitened covariance S S^T; its top eigenvalue is the squeeze ratio.
  auto ratio = [&](double t) {
    const Mat s = expm(t * gen);
    return max_eigenvalue(s * s.transpose());
  };
  double t_hi = 1.0;
  if (ratio(t_hi) > z) {
    double lo = 0.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + t_hi);
      (ratio(mid) > z ? t_hi : lo) = mid;
    }
    t_hi = lo;
  }
  const Mat s = expm(unit(rng) * t_hi * gen);
  const Mat root = sym_sqrt(sigma_star);
  return symmetrize(root * s * s.transpose() * root);
}

}  // namespace qcc
