#include "qcc/scales.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qcc {

void DiffusionSpec::validate() const {
  if (!(position >= 0.0) || !(momentum >= 0.0)) throw std::invalid_argument("diffusion rates must be >= 0");
  if (!(hbar > 0.0)) throw std::invalid_argument("hbar must be positive");
}

Mat DiffusionSpec::matrix(int d) const {
  Mat m = Mat::Zero(2 * d, 2 * d);
  m.topLeftCorner(d, d) = position * Mat::Identity(d, d);
  m.bottomRightCorner(d, d) = momentum * Mat::Identity(d, d);
  return m;
}

double ScaleReport::z_in_force(std::optional<double> z_cap) const {
  if (z) return *z;
  if (!z_cap) throw std::invalid_argument("squeeze bound z is unbounded (no diffusion); supply a z cap");
  if (!(*z_cap >= 1.0)) throw std::invalid_argument("z cap must be >= 1");
  return *z_cap;
}

ScaleReport compute_scales(const HamiltonianModel& model, const DiffusionSpec& diffusion) {
  diffusion.validate();
  if (!(model.mass > 0.0) || !(model.sup2 > 0.0) || model.sup3 < 0.0) {
    throw std::invalid_argument("compute_scales: model invariants violated");
  }
  ScaleReport r;
  const int d = model.dims;
  r.dims = d;
  r.hbar = diffusion.hbar;
  r.tau_H = std::sqrt(model.mass / model.sup2);
  r.a_H = std::sqrt(model.mass * model.sup2);
  if (model.sup3 > 0.0) {
    r.s_H = std::sqrt(model.mass) * std::pow(model.sup2, 2.5) / (model.sup3 * model.sup3);
    r.x_H = model.sup2 / model.sup3;
    r.p_H = *r.s_H / *r.x_H;  // = sqrt(s_H a_H)
  }
  r.diffusion_rate = std::min(diffusion.position * r.a_H, diffusion.momentum / r.a_H) / r.hbar;
  // D0 = min{D_x tau/x_H^2, D_p tau/p_H^2} = k hbar tau_H / s_H.
  r.D0 = r.s_H ? r.diffusion_rate * r.hbar * r.tau_H / *r.s_H : 0.0;
  if (r.diffusion_rate > 0.0) r.z = std::max(1.0 / (r.diffusion_rate * r.tau_H), 1.0);

  r.sigma_star = Mat::Zero(2 * d, 2 * d);
  r.sigma_star.topLeftCorner(d, d) = (0.5 * r.hbar / r.a_H) * Mat::Identity(d, d);
  r.sigma_star.bottomRightCorner(d, d) = (0.5 * r.hbar * r.a_H) * Mat::Identity(d, d);
  return r;
}

DiffusionSpec with_effective_position_diffusion(const HamiltonianModel& model, const DiffusionSpec& diffusion) {
  DiffusionSpec out = diffusion;
  out.position = diffusion.momentum / (model.sup2 * model.mass);
  return out;
}

double correspondence_error(double t_over_tau, double hbar_over_s, double D0, int d) {
  if (t_over_tau == 0.0 || hbar_over_s == 0.0) return 0.0;
  if (!(D0 > 0.0)) throw std::invalid_argument("correspondence_error: D0 must be positive");
  const double z = std::max(hbar_over_s / D0, 1.0);
  return std::pow(d, 1.5) * t_over_tau * std::sqrt(hbar_over_s) * std::pow(z, 1.5);
}

double theorem_epsilon(const ScaleReport& scales, double t, int d, std::optional<double> z_cap) {
  if (t < 0.0) throw std::invalid_argument("theorem_epsilon: negative time");
  if (t == 0.0 || !scales.s_H) return 0.0;
  const double z = scales.z_in_force(z_cap);
  return std::pow(d, 1.5) * (t / scales.tau_H) * std::sqrt(scales.hbar_over_s()) * std::pow(z, 1.5);
}

BelowFloorError::BelowFloorError(double epsilon, double floor)
    : std::invalid_argument("epsilon " + std::to_string(epsilon) + " is below the attainable floor " +
                            std::to_string(floor)),
      floor_(floor) {}

double diffusion_threshold(const ScaleReport& scales, double epsilon, double t, int d) {
  if (!(epsilon > 0.0) || !(t > 0.0)) throw std::invalid_argument("diffusion_threshold: epsilon, t must be positive");
  if (!scales.s_H) return 0.0;
  const double ratio = scales.hbar_over_s();
  const double growth = std::pow(d, 1.5) * t / scales.tau_H;
  const double floor = growth * std::sqrt(ratio);
  // Relative slack so that epsilon computed exactly at the floor is accepted.
  if (epsilon < floor * (1.0 - 1e-12)) throw BelowFloorError(epsilon, floor);
  return std::pow(growth / epsilon, 2.0 / 3.0) * std::pow(ratio, 4.0 / 3.0);
}

double ehrenfest_time(double lyapunov, double action_scale, double hbar) {
  if (!(lyapunov > 0.0) || !(hbar > 0.0)) throw std::invalid_argument("ehrenfest_time: arguments must be positive");
  if (!(action_scale > hbar)) throw std::invalid_argument("ehrenfest_time: action scale must exceed hbar");
  return std::log(action_scale / hbar) / lyapunov;
}

double correspondence_horizon(double lyapunov, double action_scale, double hbar) {
  if (!(lyapunov > 0.0) || !(hbar > 0.0) || !(action_scale > 0.0)) {
    throw std::invalid_argument("correspondence_horizon: arguments must be positive");
  }
  return std::sqrt(action_scale / hbar) / lyapunov;
}

double physical_example_time(double mass, double velocity, double length_scale, double localization_rate,
                             double hbar) {
  if (!(mass > 0.0) || !(velocity > 0.0) || !(length_scale > 0.0) || !(localization_rate > 0.0) || !(hbar > 0.0)) {
    throw std::invalid_argument("physical_example_time: arguments must be positive");
  }
  return hbar * std::pow(velocity, -3.5) / mass * std::pow(localization_rate, 1.5) * std::pow(length_scale, 4.5);
}

}  // namespace qcc
