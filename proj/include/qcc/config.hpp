#pragma once

// Experiment configuration: an INI-style text file with [model], [diffusion],
// [initial] (repeatable as [initial.2], [initial.3], ...), [quantum], [phase],
// [mixture], [langevin] and [run] sections. Keys are "name = value"; numeric
// lists are separated by spaces or commas; '#' starts a comment.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qcc/fokker_planck.hpp"
#include "qcc/gaussian.hpp"
#include "qcc/lindblad.hpp"
#include "qcc/mixture.hpp"
#include "qcc/potentials.hpp"
#include "qcc/scales.hpp"

namespace qcc {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

struct ModelConfig {
  PotentialKind potential = PotentialKind::harmonic;
  std::vector<double> params{1.0};
  double mass = 1.0;
  int dims = 1;
  double lo = -10.0, hi = 10.0;
  std::optional<double> lyapunov;
  bool operator==(const ModelConfig&) const = default;
};

/// hbar is given directly or as a fraction of s_H. Diffusion is given as
/// (position, momentum) rates or as a dimensionless strength d0 split evenly
/// between the two channels.
struct DiffusionConfig {
  std::optional<double> hbar, hbar_over_s;
  std::optional<double> position, momentum, d0;
  bool operator==(const DiffusionConfig&) const = default;
};

struct InitialConfig {
  double weight = 1.0;
  std::vector<double> mean;
  std::vector<double> covariance;  // row-major 2d x 2d; empty means coherent
  bool operator==(const InitialConfig&) const = default;
};

struct QuantumConfig {
  int n = 256;
  double x_min = -10.0, x_max = 10.0;
  std::optional<double> dt;
  double edge_tol = 1e-6;
  bool check_positivity = true;
  LindbladMethod method = LindbladMethod::rk4;
  bool operator==(const QuantumConfig&) const = default;
};

struct PhaseConfig {
  int nx = 128, np = 128;
  double x_min = -10.0, x_max = 10.0, p_min = -10.0, p_max = 10.0;
  FpScheme scheme = FpScheme::spectral;
  std::optional<double> dt;
  double leak_tol = 1e-4;
  int coarsen = 1;  // distances are taken after cell-averaging by this factor per axis
  bool operator==(const PhaseConfig&) const = default;
};

struct MixtureConfig {
  int particles = 1;
  std::optional<double> dt;
  KickMode kick = KickMode::stochastic;
  double collapse_cap = 1.0;
  bool operator==(const MixtureConfig&) const = default;
};

struct LangevinConfig {
  long samples = 100000;
  std::optional<double> dt;
  bool operator==(const LangevinConfig&) const = default;
};

struct RunConfig {
  std::optional<double> T, T_over_tau;
  int snapshots = 10;
  std::uint64_t seed = 1;
  std::string out = "out";
  double margin = 0.1;
  double abs_tol = 1e-8;
  bool effective_diffusion = false;
  std::optional<double> z_cap;
  bool operator==(const RunConfig&) const = default;
};

struct ExperimentConfig {
  ModelConfig model;
  DiffusionConfig diffusion;
  std::vector<InitialConfig> initial;
  QuantumConfig quantum;
  PhaseConfig phase;
  MixtureConfig mixture;
  LangevinConfig langevin;
  RunConfig run;
  bool operator==(const ExperimentConfig&) const = default;
};

/// Throws ConfigError naming the line for syntax errors, unknown sections or
/// keys, malformed values and out-of-range fields.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "config");
ExperimentConfig load_config(const std::string& path);
/// Canonical text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

/// The configuration turned into solver inputs.
struct ResolvedExperiment {
  HamiltonianModel model;
  DiffusionSpec diffusion;
  ScaleReport scales;
  double T = 0.0;
  std::vector<std::pair<double, GaussianState>> components;
};

ResolvedExperiment resolve(const ExperimentConfig& config);

}  // namespace qcc
