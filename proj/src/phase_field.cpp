#include "qcc/phase_field.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace qcc {

bool PhaseGrid::same_as(const PhaseGrid& o) const {
  return nx == o.nx && np == o.np && x_min == o.x_min && x_max == o.x_max && p_min == o.p_min && p_max == o.p_max;
}

void PhaseGrid::validate() const {
  if (nx < 2 || np < 2) throw std::invalid_argument("phase grid needs at least 2 cells per axis");
  if (!(x_max > x_min) || !(p_max > p_min)) throw std::invalid_argument("phase grid: empty box");
}

PhaseField::PhaseField(const PhaseGrid& g) : grid(g), values(Mat::Zero(g.nx, g.np)) {}

double PhaseField::total_mass() const { return values.sum() * grid.cell_area(); }

Vec PhaseField::marginal_x() const { return values.rowwise().sum() * grid.dp(); }

Vec PhaseField::marginal_p() const { return values.colwise().sum().transpose() * grid.dx(); }

double PhaseField::expectation(double (*g)(double, double)) const {
  double s = 0.0;
  for (int i = 0; i < grid.nx; ++i) {
    for (int j = 0; j < grid.np; ++j) s += values(i, j) * g(grid.x(i), grid.p(j));
  }
  return s * grid.cell_area();
}

double l1_distance(const PhaseField& f1, const PhaseField& f2) {
  if (!f1.grid.same_as(f2.grid)) throw std::invalid_argument("l1_distance: grid mismatch");
  return (f1.values - f2.values).cwiseAbs().sum() * f1.grid.cell_area();
}

namespace {

// Six-point Gauss-Legendre rule on [-1, 1].
constexpr std::array<double, 6> kGlNodes{-0.9324695142031521, -0.6612093864662645, -0.2386191860831969,
                                         0.2386191860831969,  0.6612093864662645,  0.9324695142031521};
constexpr std::array<double, 6> kGlWeights{0.1713244923791704, 0.3607615730481386, 0.4679139345726910,
                                           0.4679139345726910, 0.3607615730481386, 0.1713244923791704};

double normal_cdf(double u) { return 0.5 * std::erfc(-u / std::numbers::sqrt2); }

}  // namespace

void add_gaussian(PhaseField& f, double weight, const Vec& mean, const Mat& cov, Sampling sampling) {
  if (mean.size() != 2 || cov.rows() != 2 || cov.cols() != 2) throw std::invalid_argument("add_gaussian: d must be 1");
  const PhaseGrid& g = f.grid;
  const double a = cov(0, 0), c = cov(0, 1), b = cov(1, 1);
  const double cond_var = b - c * c / a;
  if (!(a > 0.0) || !(cond_var > 0.0)) throw std::invalid_argument("add_gaussian: covariance not positive definite");
  const double sx = std::sqrt(a), sc = std::sqrt(cond_var);
  const double reach = 9.0;
  const double dx = g.dx(), dp = g.dp();

  const int i_lo = std::max(0, static_cast<int>(std::floor((mean[0] - reach * sx - g.x_min) / dx)) - 1);
  const int i_hi = std::min(g.nx - 1, static_cast<int>(std::ceil((mean[0] + reach * sx - g.x_min) / dx)) + 1);
  const double norm_x = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * sx);
  const double norm_p = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * sc);

  for (int i = i_lo; i <= i_hi; ++i) {
    const double xc = g.x(i);
    if (sampling == Sampling::point) {
      const double ux = (xc - mean[0]) / sx;
      const double wx = weight * norm_x * std::exp(-0.5 * ux * ux);
      const double mu = mean[1] + c / a * (xc - mean[0]);
      const int j_lo = std::max(0, static_cast<int>(std::floor((mu - reach * sc - g.p_min) / dp)) - 1);
      const int j_hi = std::min(g.np - 1, static_cast<int>(std::ceil((mu + reach * sc - g.p_min) / dp)) + 1);
      for (int j = j_lo; j <= j_hi; ++j) {
        const double up = (g.p(j) - mu) / sc;
        f.values(i, j) += wx * norm_p * std::exp(-0.5 * up * up);
      }
      continue;
    }
    for (std::size_t q = 0; q < kGlNodes.size(); ++q) {
      const double xq = xc + 0.5 * dx * kGlNodes[q];
      const double ux = (xq - mean[0]) / sx;
      // Average over the x cell, exact integral over each p cell.
      const double wx = weight * 0.5 * kGlWeights[q] * norm_x * std::exp(-0.5 * ux * ux) / dp;
      const double mu = mean[1] + c / a * (xq - mean[0]);
      const int j_lo = std::max(0, static_cast<int>(std::floor((mu - reach * sc - g.p_min) / dp)) - 1);
      const int j_hi = std::min(g.np - 1, static_cast<int>(std::ceil((mu + reach * sc - g.p_min) / dp)) + 1);
      double prev = normal_cdf((g.p_min + j_lo * dp - mu) / sc);
      for (int j = j_lo; j <= j_hi; ++j) {
        const double next = normal_cdf((g.p_min + (j + 1) * dp - mu) / sc);
        f.values(i, j) += wx * (next - prev);
        prev = next;
      }
    }
  }
}

PhaseField histogram(const Mat& samples, const PhaseGrid& grid) {
  grid.validate();
  if (samples.cols() != 2) throw std::invalid_argument("histogram: samples must have two columns");
  PhaseField f(grid);
  const double dx = grid.dx(), dp = grid.dp();
  for (Eigen::Index s = 0; s < samples.rows(); ++s) {
    const double fx = (samples(s, 0) - grid.x_min) / dx;
    const double fp = (samples(s, 1) - grid.p_min) / dp;
    if (!(fx >= 0.0 && fx < grid.nx && fp >= 0.0 && fp < grid.np)) continue;
    f.values(static_cast<int>(fx), static_cast<int>(fp)) += 1.0;
  }
  if (samples.rows() > 0) f.values /= static_cast<double>(samples.rows()) * grid.cell_area();
  return f;
}

PhaseField coarsen(const PhaseField& f, int fx, int fp) {
  if (fx < 1 || fp < 1 || f.grid.nx % fx != 0 || f.grid.np % fp != 0) {
    throw std::invalid_argument("coarsen: factors must divide the grid");
  }
  PhaseGrid g = f.grid;
  g.nx /= fx;
  g.np /= fp;
  PhaseField out(g);
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.np; ++j) out.values(i, j) = f.values.block(i * fx, j * fp, fx, fp).mean();
  }
  return out;
}

void write_csv(const PhaseField& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.precision(12);
  out << "x,p,value\n";
  for (int i = 0; i < f.grid.nx; ++i) {
    for (int j = 0; j < f.grid.np; ++j) out << f.grid.x(i) << ',' << f.grid.p(j) << ',' << f.values(i, j) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace qcc
