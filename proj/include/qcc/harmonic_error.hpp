#pragma once

// Error of replacing V by its local quadratic expansion about a Gaussian's
// centre: closed-form bounds and direct numerical evaluation (d = 1).

#include <string>
#include <vector>

#include "qcc/lindblad.hpp"
#include "qcc/phase_field.hpp"
#include "qcc/potentials.hpp"

namespace qcc {

/// sqrt(5 d^3 / 3) sup3 ||sigma_xx||^{3/2} / hbar.
double lemma_bound_quantum(const Mat& sigma, const HamiltonianModel& model, double hbar, int d);
/// sqrt(3 d^3) sup3 ||sigma_xx||^{3/2} / hbar.
double lemma_bound_classical(const Mat& sigma, const HamiltonianModel& model, double hbar, int d);

/// Trace norm of -(i/hbar)[dV, tau] for the pure Gaussian tau on the grid,
/// dV = V - V^[alpha_x, 2], from the eigenvalues of the commutator.
double numeric_harmonic_error_quantum(const Vec& alpha, const Mat& sigma, const HamiltonianModel& model, double hbar,
                                      const QuantumGrid& grid);

/// L1 norm of (d tau/dp)(d dV/dx) on the phase grid (point sampling).
double numeric_harmonic_error_classical(const Vec& alpha, const Mat& sigma, const HamiltonianModel& model,
                                        const PhaseGrid& grid);

/// Grids centred on alpha covering +- `reach` standard deviations.
QuantumGrid covering_quantum_grid(const Vec& alpha, const Mat& sigma, double hbar, int n, double reach = 10.0);
PhaseGrid covering_phase_grid(const Vec& alpha, const Mat& sigma, int n, double reach = 10.0);

struct HarmonicErrorReport {
  Vec alpha;
  Mat sigma;
  double hbar = 1.0;
  int dims = 1;
  double bound_quantum = 0.0, bound_classical = 0.0;
  double numeric_quantum = 0.0, numeric_classical = 0.0;

  /// numeric / bound, zero when the bound is zero.
  double ratio_quantum() const { return bound_quantum > 0.0 ? numeric_quantum / bound_quantum : 0.0; }
  double ratio_classical() const { return bound_classical > 0.0 ? numeric_classical / bound_classical : 0.0; }
};

/// Bounds and numerics on covering grids of n points (quantum) and n x n cells
/// (classical).
HarmonicErrorReport harmonic_error_report(const Vec& alpha, const Mat& sigma, const HamiltonianModel& model, double hbar,
                                          int n = 512);

/// Columns: alpha_x,alpha_p,sigma_xx,sigma_xp,sigma_pp,hbar,bound_quantum,
/// bound_classical,numeric_quantum,numeric_classical,ratio_quantum,ratio_classical.
void write_harmonic_error_csv(const std::vector<HarmonicErrorReport>& rows, const std::string& path);

}  // namespace qcc
