#include "qcc/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qcc {

std::string to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::harmonic: return "harmonic";
    case PotentialKind::double_well: return "double_well";
    case PotentialKind::cosine: return "cosine";
    case PotentialKind::cubic: return "cubic";
  }
  return "unknown";
}

PotentialKind potential_kind_from_string(const std::string& name) {
  if (name == "harmonic") return PotentialKind::harmonic;
  if (name == "double_well") return PotentialKind::double_well;
  if (name == "cosine") return PotentialKind::cosine;
  if (name == "cubic") return PotentialKind::cubic;
  throw std::invalid_argument("unknown potential '" + name + "'");
}

Potential::Potential(PotentialKind kind, std::vector<double> params)
    : kind_(kind), params_(std::move(params)) {}

Potential Potential::harmonic(double stiffness) { return {PotentialKind::harmonic, {stiffness}}; }
Potential Potential::double_well(double a, double b) { return {PotentialKind::double_well, {a, b}}; }
Potential Potential::cosine(double v0, double wavenumber) {
  return {PotentialKind::cosine, {v0, wavenumber}};
}
Potential Potential::cubic(double stiffness, double eps) { return {PotentialKind::cubic, {stiffness, eps}}; }

Potential Potential::make(PotentialKind kind, std::vector<double> params) {
  if (params.size() != (kind == PotentialKind::harmonic ? 1u : 2u)) {
    throw std::invalid_argument("potential '" + to_string(kind) + "': wrong number of parameters");
  }
  return {kind, std::move(params)};
}

double Potential::v(double x) const {
  const auto& p = params_;
  switch (kind_) {
    case PotentialKind::harmonic: return 0.5 * p[0] * x * x;
    case PotentialKind::double_well: {
      const double s = x * x - p[1] * p[1];
      return p[0] * s * s;
    }
    case PotentialKind::cosine: return -p[0] * std::cos(p[1] * x);
    case PotentialKind::cubic: return 0.5 * p[0] * x * x + p[1] * x * x * x;
  }
  return 0.0;
}

double Potential::dv(double x) const {
  const auto& p = params_;
  switch (kind_) {
    case PotentialKind::harmonic: return p[0] * x;
    case PotentialKind::double_well: return 4.0 * p[0] * x * (x * x - p[1] * p[1]);
    case PotentialKind::cosine: return p[0] * p[1] * std::sin(p[1] * x);
    case PotentialKind::cubic: return p[0] * x + 3.0 * p[1] * x * x;
  }
  return 0.0;
}

double Potential::d2v(double x) const {
  const auto& p = params_;
  switch (kind_) {
    case PotentialKind::harmonic: return p[0];
    case PotentialKind::double_well: return p[0] * (12.0 * x * x - 4.0 * p[1] * p[1]);
    case PotentialKind::cosine: return p[0] * p[1] * p[1] * std::cos(p[1] * x);
    case PotentialKind::cubic: return p[0] + 6.0 * p[1] * x;
  }
  return 0.0;
}

double Potential::d3v(double x) const {
  const auto& p = params_;
  switch (kind_) {
    case PotentialKind::harmonic: return 0.0;
    case PotentialKind::double_well: return 24.0 * p[0] * x;
    case PotentialKind::cosine: return -p[0] * p[1] * p[1] * p[1] * std::sin(p[1] * x);
    case PotentialKind::cubic: return 6.0 * p[1];
  }
  return 0.0;
}

namespace {

// Does [lo, hi] contain offset + n * period for some integer n?
bool contains_lattice_point(double lo, double hi, double offset, double period) {
  return std::ceil((lo - offset) / period) <= std::floor((hi - offset) / period);
}

}  // namespace

double Potential::sup2(double lo, double hi) const {
  const double ends = std::max(std::abs(d2v(lo)), std::abs(d2v(hi)));
  const auto& p = params_;
  switch (kind_) {
    case PotentialKind::harmonic: return std::abs(p[0]);
    case PotentialKind::double_well:
      // v'' is an even parabola; its extreme interior value sits at x = 0.
      return (lo <= 0.0 && hi >= 0.0) ? std::max(ends, std::abs(d2v(0.0))) : ends;
    case PotentialKind::cosine: {
      const double q = std::abs(p[1]);
      if (q == 0.0) return 0.0;
      return contains_lattice_point(lo, hi, 0.0, std::numbers::pi / q) ? std::abs(p[0]) * q * q : ends;
    }
    case PotentialKind::cubic: return ends;
  }
  return ends;
}

double Potential::sup3(double lo, double hi) const {
  const double ends = std::max(std::abs(d3v(lo)), std::abs(d3v(hi)));
  const auto& p = params_;
  switch (kind_) {
    case PotentialKind::harmonic: return 0.0;
    case PotentialKind::double_well: return ends;
    case PotentialKind::cosine: {
      const double q = std::abs(p[1]);
      if (q == 0.0) return 0.0;
      const double period = std::numbers::pi / q;
      return contains_lattice_point(lo, hi, 0.5 * period, period) ? std::abs(p[0]) * q * q * q : ends;
    }
    case PotentialKind::cubic: return 6.0 * std::abs(p[1]);
  }
  return ends;
}

bool HamiltonianModel::contains(const Vec& x) const {
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    if (x[k] < lo || x[k] > hi) return false;
  }
  return true;
}

double HamiltonianModel::value(const Vec& x) const {
  double s = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) s += potential.v(x[k]);
  return s;
}

Vec HamiltonianModel::gradient(const Vec& x) const {
  Vec g(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) g[k] = potential.dv(x[k]);
  return g;
}

Mat HamiltonianModel::hessian(const Vec& x) const {
  Mat h = Mat::Zero(x.size(), x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) h(k, k) = potential.d2v(x[k]);
  return h;
}

double HamiltonianModel::third_directional(const Vec& x, const Vec& w1, const Vec& w2,
                                           const Vec& w3) const {
  double s = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) s += potential.d3v(x[k]) * w1[k] * w2[k] * w3[k];
  return s;
}

HamiltonianModel make_model(double mass, Potential potential, int dims, double lo, double hi) {
  if (!(mass > 0.0)) throw std::invalid_argument("model: mass must be positive");
  if (dims < 1) throw std::invalid_argument("model: dims must be >= 1");
  if (!(hi > lo)) throw std::invalid_argument("model: empty domain");
  HamiltonianModel m{mass, potential, dims, lo, hi, potential.sup2(lo, hi), potential.sup3(lo, hi)};
  if (!(m.sup2 > 0.0)) throw std::invalid_argument("model: sup|V''| must be positive on the domain");
  return m;
}

double QuadraticExpansion::operator()(const Vec& x) const {
  const Vec dx = x - base;
  return value + gradient.dot(dx) + 0.5 * dx.dot(hessian * dx);
}

QuadraticExpansion harmonic_expansion(const HamiltonianModel& model, const Vec& a_x) {
  if (a_x.size() != model.dims) throw std::invalid_argument("harmonic_expansion: dimension mismatch");
  if (!model.contains(a_x)) throw std::invalid_argument("harmonic_expansion: base point outside the domain");
  return {a_x, model.value(a_x), model.gradient(a_x), model.hessian(a_x)};
}

double taylor_remainder_bound(const HamiltonianModel& model, const Vec& dx) {
  const double r = dx.norm();
  return model.sup3 * r * r * r / 6.0;
}

Flow flow_vector(const HamiltonianModel& model, const Vec& alpha) {
  const int d = model.dims;
  if (alpha.size() != 2 * d) throw std::invalid_argument("flow_vector: dimension mismatch");
  Flow f;
  f.velocity.resize(2 * d);
  const Vec x = alpha.head(d);
  f.velocity.head(d) = alpha.tail(d) / model.mass;
  f.velocity.tail(d) = -model.gradient(x);
  f.inside_domain = model.contains(x);
  return f;
}

Mat hamiltonian_matrix(const HamiltonianModel& model, const Vec& alpha) {
  const int d = model.dims;
  if (alpha.size() != 2 * d) throw std::invalid_argument("hamiltonian_matrix: dimension mismatch");
  Mat f = Mat::Zero(2 * d, 2 * d);
  f.topRightCorner(d, d) = Mat::Identity(d, d) / model.mass;
  f.bottomLeftCorner(d, d) = -model.hessian(alpha.head(d));
  return f;
}

}  // namespace qcc
