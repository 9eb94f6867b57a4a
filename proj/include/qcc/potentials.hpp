#pragma once

// Built-in potentials and the Hamiltonian model H = p^2/2m + V(x).
//
// Potentials are separable, V(x) = sum_k v(x_k), so every built-in works in
// any dimension d. The sup-norms of the second and third derivatives are taken
// over a declared axis-aligned box [lo, hi]^d rather than all of space.

#include <string>
#include <vector>

#include "qcc/linalg.hpp"

namespace qcc {

enum class PotentialKind { harmonic, double_well, cosine, cubic };

std::string to_string(PotentialKind kind);
PotentialKind potential_kind_from_string(const std::string& name);

/// One-dimensional profile v(x) with closed-form derivatives.
///
///   harmonic     v = k x^2 / 2                    params {k}
///   double_well  v = a (x^2 - b^2)^2              params {a, b}
///   cosine       v = -V0 cos(q x)                 params {V0, q}
///   cubic        v = k x^2 / 2 + eps x^3          params {k, eps}
class Potential {
 public:
  static Potential harmonic(double stiffness);
  static Potential double_well(double a, double b);
  static Potential cosine(double v0, double wavenumber);
  static Potential cubic(double stiffness, double eps);
  static Potential make(PotentialKind kind, std::vector<double> params);

  PotentialKind kind() const { return kind_; }
  const std::vector<double>& params() const { return params_; }

  double v(double x) const;
  double dv(double x) const;
  double d2v(double x) const;
  double d3v(double x) const;

  /// sup |v''| and sup |v'''| over [lo, hi], from the analytic maxima.
  double sup2(double lo, double hi) const;
  double sup3(double lo, double hi) const;

 private:
  Potential(PotentialKind kind, std::vector<double> params);

  PotentialKind kind_;
  std::vector<double> params_;
};

struct HamiltonianModel {
  double mass = 1.0;
  Potential potential = Potential::harmonic(1.0);
  int dims = 1;
  double lo = -1.0;  // box [lo, hi]^dims
  double hi = 1.0;
  double sup2 = 1.0;
  double sup3 = 0.0;

  bool contains(const Vec& x) const;
  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  Mat hessian(const Vec& x) const;
  /// [(w1.grad)(w2.grad)(w3.grad) V](x).
  double third_directional(const Vec& x, const Vec& w1, const Vec& w2, const Vec& w3) const;
};

/// Builds a model and fills sup2/sup3 from the box.
HamiltonianModel make_model(double mass, Potential potential, int dims, double lo, double hi);

struct QuadraticExpansion {
  Vec base;
  double value = 0.0;
  Vec gradient;
  Mat hessian;

  double operator()(const Vec& x) const;
};

/// Second-order Taylor polynomial of V about a_x. Throws if a_x is outside the box.
QuadraticExpansion harmonic_expansion(const HamiltonianModel& model, const Vec& a_x);

/// sup3 |dx|^3 / 6, the Lagrange-remainder bound on |V - V^[a,2]|.
double taylor_remainder_bound(const HamiltonianModel& model, const Vec& dx);

/// Classical drift (alpha_p / m, -grad V(alpha_x)). Evaluated by extension
/// outside the box; `inside_domain` reports whether that happened.
struct Flow {
  Vec velocity;
  bool inside_domain = true;
};
Flow flow_vector(const HamiltonianModel& model, const Vec& alpha);

/// Linearisation of the flow, [[0, I/m], [-hess V(alpha_x), 0]]. Generates
/// the covariance drift F sigma + sigma F^T.
Mat hamiltonian_matrix(const HamiltonianModel& model, const Vec& alpha);

}  // namespace qcc
