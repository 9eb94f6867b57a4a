#pragma once

// Densities on a uniform (x, p) grid for d = 1. Values are indexed
// values(i, j) with i along x and j along p; cell centres sit at
// x_min + (i + 1/2) dx and p_min + (j + 1/2) dp.

#include <string>

#include "qcc/linalg.hpp"

namespace qcc {

struct PhaseGrid {
  int nx = 0;
  int np = 0;
  double x_min = 0.0, x_max = 0.0;
  double p_min = 0.0, p_max = 0.0;

  double dx() const { return (x_max - x_min) / nx; }
  double dp() const { return (p_max - p_min) / np; }
  double x(int i) const { return x_min + (i + 0.5) * dx(); }
  double p(int j) const { return p_min + (j + 0.5) * dp(); }
  double cell_area() const { return dx() * dp(); }
  bool same_as(const PhaseGrid& o) const;
  void validate() const;
};

/// How a continuous density is turned into grid values.
enum class Sampling { point, cell_average };

struct PhaseField {
  PhaseGrid grid;
  Mat values;

  explicit PhaseField(const PhaseGrid& g = {});
  double total_mass() const;
  double min_value() const { return values.minCoeff(); }
  double max_value() const { return values.maxCoeff(); }
  Vec marginal_x() const;  // integrated over p
  Vec marginal_p() const;
  /// sum f * g(x, p) * cell area.
  double expectation(double (*g)(double, double)) const;
};

/// sum |f1 - f2| * cell area. Throws on grid mismatch.
double l1_distance(const PhaseField& f1, const PhaseField& f2);

/// Adds weight * N(mean, cov) for a 2-vector mean and 2x2 covariance.
/// Contributions beyond 9 standard deviations are skipped.
void add_gaussian(PhaseField& f, double weight, const Vec& mean, const Mat& cov, Sampling sampling);

/// Normalised histogram of (x, p) samples (one per row); samples outside the
/// box are dropped, so the mass is the fraction inside.
PhaseField histogram(const Mat& samples, const PhaseGrid& grid);

/// Cell-average coarsening by integer factors.
PhaseField coarsen(const PhaseField& f, int fx, int fp);

/// Rows "x,p,value" with a header line.
void write_csv(const PhaseField& f, const std::string& path);

}  // namespace qcc
