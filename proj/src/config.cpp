#include "qcc/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace qcc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + num(v[i]);
  return s;
}

class Parser {
 public:
  explicit Parser(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(int line, const std::string& what) const { throw ConfigError(source_, line, what); }

  double real(const std::string& v, int line) const {
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) fail(line, "expected a number, got '" + v + "'");
    return out;
  }

  long integer(const std::string& v, int line) const {
    long out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) fail(line, "expected an integer, got '" + v + "'");
    return out;
  }

  bool boolean(const std::string& v, int line) const {
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    fail(line, "expected true or false, got '" + v + "'");
  }

  std::vector<double> reals(const std::string& v, int line) const {
    std::string s = v;
    for (char& c : s) {
      if (c == ',') c = ' ';
    }
    std::istringstream in(s);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) out.push_back(real(tok, line));
    if (out.empty()) fail(line, "expected a list of numbers");
    return out;
  }

  double positive(const std::string& v, int line) const {
    const double x = real(v, line);
    if (!(x > 0.0)) fail(line, "value must be positive");
    return x;
  }

  double nonnegative(const std::string& v, int line) const {
    const double x = real(v, line);
    if (!(x >= 0.0)) fail(line, "value must be non-negative");
    return x;
  }

 private:
  std::string source_;
};

using Handler = std::function<void(const std::string&, int)>;

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  Parser P(source);
  ExperimentConfig c;
  std::map<std::string, Handler> handlers;
  std::string section;
  std::map<std::string, int> seen;  // "section.key" -> line
  std::vector<int> mean_lines;
  int domain_line = 0, model_line = 0;

  auto bind_section = [&](const std::string& name, int line) {
    handlers.clear();
    if (name == "model") {
      model_line = line;
      handlers["potential"] = [&](const std::string& v, int l) {
        try {
          c.model.potential = potential_kind_from_string(v);
        } catch (const std::invalid_argument& e) {
          P.fail(l, e.what());
        }
      };
      handlers["params"] = [&](const std::string& v, int l) { c.model.params = P.reals(v, l); };
      handlers["mass"] = [&](const std::string& v, int l) { c.model.mass = P.positive(v, l); };
      handlers["dims"] = [&](const std::string& v, int l) {
        const long d = P.integer(v, l);
        if (d < 1 || d > 16) P.fail(l, "dims must be between 1 and 16");
        c.model.dims = static_cast<int>(d);
      };
      handlers["domain"] = [&](const std::string& v, int l) {
        const auto r = P.reals(v, l);
        if (r.size() != 2 || !(r[1] > r[0])) P.fail(l, "domain must be 'lo hi' with lo < hi");
        c.model.lo = r[0];
        c.model.hi = r[1];
        domain_line = l;
      };
      handlers["lyapunov"] = [&](const std::string& v, int l) { c.model.lyapunov = P.positive(v, l); };
    } else if (name == "diffusion") {
      handlers["hbar"] = [&](const std::string& v, int l) { c.diffusion.hbar = P.positive(v, l); };
      handlers["hbar_over_s"] = [&](const std::string& v, int l) { c.diffusion.hbar_over_s = P.positive(v, l); };
      handlers["position"] = [&](const std::string& v, int l) { c.diffusion.position = P.nonnegative(v, l); };
      handlers["momentum"] = [&](const std::string& v, int l) { c.diffusion.momentum = P.nonnegative(v, l); };
      handlers["d0"] = [&](const std::string& v, int l) { c.diffusion.d0 = P.nonnegative(v, l); };
    } else if (name == "initial" || name.rfind("initial.", 0) == 0) {
      c.initial.emplace_back();
      mean_lines.push_back(line);
      const std::size_t idx = c.initial.size() - 1;
      handlers["weight"] = [&, idx](const std::string& v, int l) { c.initial[idx].weight = P.nonnegative(v, l); };
      handlers["mean"] = [&, idx](const std::string& v, int l) {
        c.initial[idx].mean = P.reals(v, l);
        mean_lines[idx] = l;
      };
      handlers["covariance"] = [&, idx](const std::string& v, int l) {
        if (trim(v) == "coherent") {
          c.initial[idx].covariance.clear();
        } else {
          c.initial[idx].covariance = P.reals(v, l);
        }
      };
    } else if (name == "quantum") {
      handlers["n"] = [&](const std::string& v, int l) {
        const long n = P.integer(v, l);
        if (n < 8 || n % 2 != 0) P.fail(l, "n must be even and at least 8");
        c.quantum.n = static_cast<int>(n);
      };
      handlers["x_range"] = [&](const std::string& v, int l) {
        const auto r = P.reals(v, l);
        if (r.size() != 2 || !(r[1] > r[0])) P.fail(l, "x_range must be 'min max' with min < max");
        c.quantum.x_min = r[0];
        c.quantum.x_max = r[1];
      };
      handlers["dt"] = [&](const std::string& v, int l) { c.quantum.dt = P.positive(v, l); };
      handlers["edge_tol"] = [&](const std::string& v, int l) { c.quantum.edge_tol = P.positive(v, l); };
      handlers["check_positivity"] = [&](const std::string& v, int l) { c.quantum.check_positivity = P.boolean(v, l); };
      handlers["method"] = [&](const std::string& v, int l) {
        try {
          c.quantum.method = lindblad_method_from_string(v);
        } catch (const std::invalid_argument& e) {
          P.fail(l, e.what());
        }
      };
    } else if (name == "phase") {
      handlers["cells"] = [&](const std::string& v, int l) {
        const auto r = P.reals(v, l);
        if (r.size() != 2 || r[0] < 4 || r[1] < 4 || r[0] != std::floor(r[0]) || r[1] != std::floor(r[1])) {
          P.fail(l, "cells must be two integers >= 4");
        }
        c.phase.nx = static_cast<int>(r[0]);
        c.phase.np = static_cast<int>(r[1]);
      };
      handlers["x_range"] = [&](const std::string& v, int l) {
        const auto r = P.reals(v, l);
        if (r.size() != 2 || !(r[1] > r[0])) P.fail(l, "x_range must be 'min max' with min < max");
        c.phase.x_min = r[0];
        c.phase.x_max = r[1];
      };
      handlers["p_range"] = [&](const std::string& v, int l) {
        const auto r = P.reals(v, l);
        if (r.size() != 2 || !(r[1] > r[0])) P.fail(l, "p_range must be 'min max' with min < max");
        c.phase.p_min = r[0];
        c.phase.p_max = r[1];
      };
      handlers["scheme"] = [&](const std::string& v, int l) {
        try {
          c.phase.scheme = fp_scheme_from_string(v);
        } catch (const std::invalid_argument& e) {
          P.fail(l, e.what());
        }
      };
      handlers["dt"] = [&](const std::string& v, int l) { c.phase.dt = P.positive(v, l); };
      handlers["leak_tol"] = [&](const std::string& v, int l) { c.phase.leak_tol = P.positive(v, l); };
      handlers["coarsen"] = [&](const std::string& v, int l) {
        const long f = P.integer(v, l);
        if (f < 1) P.fail(l, "coarsen must be a positive integer");
        c.phase.coarsen = static_cast<int>(f);
      };
    } else if (name == "mixture") {
      handlers["particles"] = [&](const std::string& v, int l) {
        const long n = P.integer(v, l);
        if (n < 1) P.fail(l, "particles must be positive");
        c.mixture.particles = static_cast<int>(n);
      };
      handlers["dt"] = [&](const std::string& v, int l) { c.mixture.dt = P.positive(v, l); };
      handlers["kick"] = [&](const std::string& v, int l) {
        try {
          c.mixture.kick = kick_mode_from_string(v);
        } catch (const std::invalid_argument& e) {
          P.fail(l, e.what());
        }
      };
      handlers["collapse_cap"] = [&](const std::string& v, int l) { c.mixture.collapse_cap = P.positive(v, l); };
    } else if (name == "langevin") {
      handlers["samples"] = [&](const std::string& v, int l) {
        const long n = P.integer(v, l);
        if (n < 2) P.fail(l, "samples must be at least 2");
        c.langevin.samples = n;
      };
      handlers["dt"] = [&](const std::string& v, int l) { c.langevin.dt = P.positive(v, l); };
    } else if (name == "run") {
      handlers["T"] = [&](const std::string& v, int l) { c.run.T = P.nonnegative(v, l); };
      handlers["T_over_tau"] = [&](const std::string& v, int l) { c.run.T_over_tau = P.nonnegative(v, l); };
      handlers["snapshots"] = [&](const std::string& v, int l) {
        const long n = P.integer(v, l);
        if (n < 1) P.fail(l, "snapshots must be positive");
        c.run.snapshots = static_cast<int>(n);
      };
      handlers["seed"] = [&](const std::string& v, int l) {
        const long s = P.integer(v, l);
        if (s < 0) P.fail(l, "seed must be non-negative");
        c.run.seed = static_cast<std::uint64_t>(s);
      };
      handlers["out"] = [&](const std::string& v, int l) {
        if (v.empty()) P.fail(l, "out must not be empty");
        c.run.out = v;
      };
      handlers["margin"] = [&](const std::string& v, int l) { c.run.margin = P.nonnegative(v, l); };
      handlers["abs_tol"] = [&](const std::string& v, int l) { c.run.abs_tol = P.nonnegative(v, l); };
      handlers["effective_diffusion"] = [&](const std::string& v, int l) { c.run.effective_diffusion = P.boolean(v, l); };
      handlers["z_cap"] = [&](const std::string& v, int l) {
        const double z = P.real(v, l);
        if (!(z >= 1.0)) P.fail(l, "z_cap must be >= 1");
        c.run.z_cap = z;
      };
    } else {
      P.fail(line, "unknown section [" + name + "]");
    }
  };

  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') P.fail(line, "malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      for (const auto& [key, at] : seen) {
        if (key.rfind(section + ".", 0) == 0 && key.find('.', section.size() + 1) == std::string::npos) {
          P.fail(line, "section [" + section + "] repeated (first at line " + std::to_string(at) + ")");
        }
      }
      seen[section + "."] = line;
      bind_section(section, line);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) P.fail(line, "expected 'key = value'");
    if (section.empty()) P.fail(line, "key outside of any section");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    const auto h = handlers.find(key);
    if (h == handlers.end()) P.fail(line, "unknown key '" + key + "' in [" + section + "]");
    const std::string id = section + "." + key;
    if (seen.count(id)) P.fail(line, "duplicate key '" + key + "' (first at line " + std::to_string(seen[id]) + ")");
    seen[id] = line;
    h->second(value, line);
  }

  const int d = c.model.dims;
  const std::size_t expected_params = c.model.potential == PotentialKind::harmonic ? 1u : 2u;
  if (c.model.params.size() != expected_params) {
    P.fail(model_line, to_string(c.model.potential) + " takes " + std::to_string(expected_params) + " parameter(s)");
  }
  (void)domain_line;
  if (c.diffusion.hbar && c.diffusion.hbar_over_s) {
    P.fail(seen["diffusion.hbar_over_s"], "give either hbar or hbar_over_s, not both");
  }
  if (c.diffusion.d0 && (c.diffusion.position || c.diffusion.momentum)) {
    P.fail(seen["diffusion.d0"], "give either d0 or position/momentum rates, not both");
  }
  if (c.phase.nx % c.phase.coarsen != 0 || c.phase.np % c.phase.coarsen != 0) {
    P.fail(seen["phase.coarsen"], "coarsen must divide both cell counts");
  }
  if (c.run.T && c.run.T_over_tau) P.fail(seen["run.T_over_tau"], "give either T or T_over_tau, not both");
  for (std::size_t i = 0; i < c.initial.size(); ++i) {
    const auto& ic = c.initial[i];
    if (ic.mean.size() != static_cast<std::size_t>(2 * d)) {
      P.fail(mean_lines[i], "mean must have 2*dims = " + std::to_string(2 * d) + " entries");
    }
    if (!ic.covariance.empty() && ic.covariance.size() != static_cast<std::size_t>(4 * d * d)) {
      P.fail(mean_lines[i], "covariance must have (2*dims)^2 entries or be 'coherent'");
    }
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return parse_config(s.str(), path);
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "[model]\n"
    << "potential = " << to_string(c.model.potential) << '\n'
    << "params = " << list(c.model.params) << '\n'
    << "mass = " << num(c.model.mass) << '\n'
    << "dims = " << c.model.dims << '\n'
    << "domain = " << num(c.model.lo) << ' ' << num(c.model.hi) << '\n';
  if (c.model.lyapunov) o << "lyapunov = " << num(*c.model.lyapunov) << '\n';

  o << "\n[diffusion]\n";
  if (c.diffusion.hbar) o << "hbar = " << num(*c.diffusion.hbar) << '\n';
  if (c.diffusion.hbar_over_s) o << "hbar_over_s = " << num(*c.diffusion.hbar_over_s) << '\n';
  if (c.diffusion.position) o << "position = " << num(*c.diffusion.position) << '\n';
  if (c.diffusion.momentum) o << "momentum = " << num(*c.diffusion.momentum) << '\n';
  if (c.diffusion.d0) o << "d0 = " << num(*c.diffusion.d0) << '\n';

  for (std::size_t i = 0; i < c.initial.size(); ++i) {
    const auto& ic = c.initial[i];
    o << "\n[initial" << (i ? "." + std::to_string(i + 1) : "") << "]\n"
      << "weight = " << num(ic.weight) << '\n'
      << "mean = " << list(ic.mean) << '\n'
      << "covariance = " << (ic.covariance.empty() ? "coherent" : list(ic.covariance)) << '\n';
  }

  o << "\n[quantum]\n"
    << "n = " << c.quantum.n << '\n'
    << "x_range = " << num(c.quantum.x_min) << ' ' << num(c.quantum.x_max) << '\n';
  if (c.quantum.dt) o << "dt = " << num(*c.quantum.dt) << '\n';
  o << "edge_tol = " << num(c.quantum.edge_tol) << '\n'
    << "check_positivity = " << (c.quantum.check_positivity ? "true" : "false") << '\n'
    << "method = " << to_string(c.quantum.method) << '\n';

  o << "\n[phase]\n"
    << "cells = " << c.phase.nx << ' ' << c.phase.np << '\n'
    << "x_range = " << num(c.phase.x_min) << ' ' << num(c.phase.x_max) << '\n'
    << "p_range = " << num(c.phase.p_min) << ' ' << num(c.phase.p_max) << '\n'
    << "scheme = " << to_string(c.phase.scheme) << '\n';
  if (c.phase.dt) o << "dt = " << num(*c.phase.dt) << '\n';
  o << "leak_tol = " << num(c.phase.leak_tol) << '\n'
    << "coarsen = " << c.phase.coarsen << '\n';

  o << "\n[mixture]\n"
    << "particles = " << c.mixture.particles << '\n';
  if (c.mixture.dt) o << "dt = " << num(*c.mixture.dt) << '\n';
  o << "kick = " << to_string(c.mixture.kick) << '\n'
    << "collapse_cap = " << num(c.mixture.collapse_cap) << '\n';

  o << "\n[langevin]\n"
    << "samples = " << c.langevin.samples << '\n';
  if (c.langevin.dt) o << "dt = " << num(*c.langevin.dt) << '\n';

  o << "\n[run]\n";
  if (c.run.T) o << "T = " << num(*c.run.T) << '\n';
  if (c.run.T_over_tau) o << "T_over_tau = " << num(*c.run.T_over_tau) << '\n';
  o << "snapshots = " << c.run.snapshots << '\n'
    << "seed = " << c.run.seed << '\n'
    << "out = " << c.run.out << '\n'
    << "margin = " << num(c.run.margin) << '\n'
    << "abs_tol = " << num(c.run.abs_tol) << '\n'
    << "effective_diffusion = " << (c.run.effective_diffusion ? "true" : "false") << '\n';
  if (c.run.z_cap) o << "z_cap = " << num(*c.run.z_cap) << '\n';
  return o.str();
}

ResolvedExperiment resolve(const ExperimentConfig& c) {
  ResolvedExperiment r;
  const int d = c.model.dims;
  r.model = make_model(c.model.mass, Potential::make(c.model.potential, c.model.params), d, c.model.lo, c.model.hi);

  // Scales that do not depend on hbar or diffusion.
  const ScaleReport base = compute_scales(r.model, DiffusionSpec{0.0, 0.0, 1.0});
  double hbar = 1.0;
  if (c.diffusion.hbar) {
    hbar = *c.diffusion.hbar;
  } else if (c.diffusion.hbar_over_s) {
    if (!base.s_H) throw std::invalid_argument("hbar_over_s needs an anharmonic potential (s_H is infinite)");
    hbar = *c.diffusion.hbar_over_s * *base.s_H;
  }
  r.diffusion.hbar = hbar;
  if (c.diffusion.d0) {
    if (!base.s_H) throw std::invalid_argument("d0 needs an anharmonic potential (s_H is infinite)");
    r.diffusion.position = *c.diffusion.d0 * *base.x_H * *base.x_H / base.tau_H;
    r.diffusion.momentum = *c.diffusion.d0 * *base.p_H * *base.p_H / base.tau_H;
  } else {
    r.diffusion.position = c.diffusion.position.value_or(0.0);
    r.diffusion.momentum = c.diffusion.momentum.value_or(0.0);
  }
  if (c.run.effective_diffusion) r.diffusion = with_effective_position_diffusion(r.model, r.diffusion);
  r.scales = compute_scales(r.model, r.diffusion);
  r.scales.lyapunov = c.model.lyapunov;
  r.T = c.run.T ? *c.run.T : c.run.T_over_tau.value_or(0.0) * r.scales.tau_H;

  for (const auto& ic : c.initial) {
    GaussianState s;
    s.hbar = hbar;
    s.mean = Eigen::Map<const Vec>(ic.mean.data(), static_cast<Eigen::Index>(ic.mean.size()));
    if (ic.covariance.empty()) {
      s.cov = r.scales.sigma_star;
    } else {
      s.cov = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          ic.covariance.data(), 2 * d, 2 * d);
    }
    r.components.emplace_back(ic.weight, s);
  }
  return r;
}

}  // namespace qcc
