#include "qcc/linalg.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace qcc {

Mat symplectic_form(int d) {
  Mat omega = Mat::Zero(2 * d, 2 * d);
  omega.topRightCorner(d, d) = Mat::Identity(d, d);
  omega.bottomLeftCorner(d, d) = -Mat::Identity(d, d);
  return omega;
}

double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

bool is_symmetric(const Mat& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(max_abs(m), 1e-300);
  return max_abs(m - m.transpose()) <= rel_tol * scale;
}

Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

Mat sym_apply(const Mat& m, const std::function<double(double)>& f) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(m));
  Vec lam = es.eigenvalues().unaryExpr(f);
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

Mat sym_sqrt(const Mat& m) {
  return sym_apply(m, [](double x) { return std::sqrt(std::max(x, 0.0)); });
}

Mat sym_inv_sqrt(const Mat& m) {
  return sym_apply(m, [](double x) {
    if (x <= 0.0) throw std::invalid_argument("sym_inv_sqrt: matrix is not positive definite");
    return 1.0 / std::sqrt(x);
  });
}

double min_eigenvalue(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_eigenvalue(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double op_norm(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

Mat expm(const Mat& m) { return m.exp(); }

Mat geometric_mean(const Mat& a, const Mat& b) {
  const Mat ah = sym_sqrt(a);
  const Mat aih = sym_inv_sqrt(a);
  return symmetrize(ah * sym_sqrt(aih * b * aih) * ah);
}

}  // namespace qcc
