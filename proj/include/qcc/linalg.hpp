#pragma once

// Dense linear-algebra vocabulary shared by every module: Eigen aliases,
// the symplectic form, and symmetric-matrix functions.

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qcc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using cplx = std::complex<double>;

/// Raised when a run-time invariant is violated during time stepping.
class SolverAbort : public std::runtime_error {
 public:
  SolverAbort(const std::string& what, long step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  long step() const noexcept { return step_; }
  /// The same abort with `context` prefixed to the message.
  SolverAbort in_context(const std::string& context) const { return SolverAbort(context + what(), step_, 0); }

 private:
  SolverAbort(const std::string& full, long step, int) : std::runtime_error(full), step_(step) {}
  long step_;
};

/// Omega = [[0, I], [-I, 0]] for d degrees of freedom.
Mat symplectic_form(int d);

double max_abs(const Mat& m);
bool is_symmetric(const Mat& m, double rel_tol = 1e-12);
Mat symmetrize(const Mat& m);

/// f applied to the spectrum of a symmetric matrix.
Mat sym_apply(const Mat& m, const std::function<double(double)>& f);
Mat sym_sqrt(const Mat& m);
Mat sym_inv_sqrt(const Mat& m);
double min_eigenvalue(const Mat& m);
double max_eigenvalue(const Mat& m);

/// Operator norm (largest singular value).
double op_norm(const Mat& m);

/// Matrix exponential of a general real square matrix.
Mat expm(const Mat& m);

/// Geometric mean A # B of two symmetric positive-definite matrices.
Mat geometric_mean(const Mat& a, const Mat& b);

}  // namespace qcc
