#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "qcc/potentials.hpp"

using namespace qcc;
using doctest::Approx;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

std::vector<HamiltonianModel> builtins() {
  return {make_model(1.0, Potential::harmonic(2.0), 1, -3, 3), make_model(1.0, Potential::double_well(1.0, 1.0), 1, -2, 2),
          make_model(1.5, Potential::cosine(0.7, 1.3), 1, -4, 4), make_model(1.0, Potential::cubic(1.0, 0.2), 1, -2, 3)};
}

}  // namespace

TEST_SUITE("potentials") {
  TEST_CASE("names round-trip") {
    for (auto k : {PotentialKind::harmonic, PotentialKind::double_well, PotentialKind::cosine, PotentialKind::cubic}) {
      CHECK(potential_kind_from_string(to_string(k)) == k);
    }
    CHECK_THROWS_AS(potential_kind_from_string("morse"), std::invalid_argument);
    CHECK_THROWS(Potential::make(PotentialKind::cosine, {1.0}));
  }

  TEST_CASE("derivatives match central differences at second order") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.8, 1.8);
    for (const auto& m : builtins()) {
      const Potential& p = m.potential;
      for (int s = 0; s < 50; ++s) {
        const double x = u(rng);
        auto err = [&](double h) {
          const double e1 = std::abs((p.v(x + h) - p.v(x - h)) / (2 * h) - p.dv(x));
          const double e2 = std::abs((p.dv(x + h) - p.dv(x - h)) / (2 * h) - p.d2v(x));
          const double e3 = std::abs((p.d2v(x + h) - p.d2v(x - h)) / (2 * h) - p.d3v(x));
          return std::max({e1, e2, e3});
        };
        const double a = err(1e-2), b = err(5e-3);
        CHECK(b <= 1e-3);
        if (a > 1e-9) CHECK(b < 0.3 * a);
      }
    }
  }

  TEST_CASE("sup norms agree with dense sampling to 1%") {
    for (const auto& m : builtins()) {
      double s2 = 0.0, s3 = 0.0;
      for (int i = 0; i <= 100000; ++i) {
        const double x = m.lo + (m.hi - m.lo) * i / 100000.0;
        s2 = std::max(s2, std::abs(m.potential.d2v(x)));
        s3 = std::max(s3, std::abs(m.potential.d3v(x)));
      }
      CHECK(m.sup2 == Approx(s2).epsilon(0.01));
      if (s3 == 0.0) {
        CHECK(m.sup3 == 0.0);
      } else {
        CHECK(m.sup3 == Approx(s3).epsilon(0.01));
      }
    }
  }

  TEST_CASE("model invariants are enforced") {
    CHECK_THROWS(make_model(0.0, Potential::harmonic(1), 1, -1, 1));
    CHECK_THROWS(make_model(1.0, Potential::harmonic(1), 0, -1, 1));
    CHECK_THROWS(make_model(1.0, Potential::harmonic(1), 1, 1, 1));
  }

  TEST_CASE("harmonic expansion") {
    const auto quad = make_model(1.0, Potential::harmonic(1.0), 1, -10, 10);
    const auto e = harmonic_expansion(quad, vec({0.7}));
    for (double x : {-3.0, 0.0, 2.5}) CHECK(e(vec({x})) == Approx(0.5 * x * x).epsilon(1e-14));

    // x^4/4 is the double well with a = 1/4, b = 0.
    const auto quartic = make_model(1.0, Potential::double_well(0.25, 0.0), 1, -2, 2);
    const auto q = harmonic_expansion(quartic, vec({1.0}));
    CHECK(q.value == Approx(0.25));
    CHECK(q.gradient[0] == Approx(1.0));
    CHECK(q.hessian(0, 0) == Approx(3.0));

    const auto pendulum = make_model(1.0, Potential::cosine(1.0, 1.0), 1, -std::numbers::pi, std::numbers::pi);
    const auto c = harmonic_expansion(pendulum, vec({0.0}));
    CHECK(c.value == Approx(-1.0));
    CHECK(c.gradient[0] == Approx(0.0));
    CHECK(c.hessian(0, 0) == Approx(1.0));

    CHECK_THROWS(harmonic_expansion(pendulum, vec({4.0})));
  }

  TEST_CASE("Taylor remainder bound") {
    const auto quartic = make_model(1.0, Potential::double_well(0.25, 0.0), 1, -2, 2);
    CHECK(quartic.sup2 == Approx(12.0));
    CHECK(quartic.sup3 == Approx(12.0));
    const auto e = harmonic_expansion(quartic, vec({0.0}));
    CHECK(std::abs(quartic.value(vec({1.0})) - e(vec({1.0}))) == Approx(0.25));
    CHECK(taylor_remainder_bound(quartic, vec({1.0})) == Approx(2.0));
    CHECK(taylor_remainder_bound(quartic, vec({2.0})) == Approx(8.0 * taylor_remainder_bound(quartic, vec({1.0}))));
    const auto quad = make_model(1.0, Potential::harmonic(3.0), 1, -2, 2);
    CHECK(taylor_remainder_bound(quad, vec({1.3})) == 0.0);

    std::mt19937_64 rng(11);
    for (const auto& m : builtins()) {
      std::uniform_real_distribution<double> ua(m.lo, m.hi);
      for (int s = 0; s < 10000; ++s) {
        const double a = ua(rng);
        const double b = ua(rng);
        const auto ex = harmonic_expansion(m, vec({a}));
        const double rem = std::abs(m.value(vec({b})) - ex(vec({b})));
        CHECK(rem <= taylor_remainder_bound(m, vec({b - a})) * (1 + 1e-12) + 1e-12);
      }
    }
  }

  TEST_CASE("flow vector") {
    const auto h = make_model(1.0, Potential::harmonic(1.0), 1, -10, 10);
    const Flow f = flow_vector(h, vec({1.0, 0.0}));
    CHECK(f.velocity[0] == Approx(0.0));
    CHECK(f.velocity[1] == Approx(-1.0));
    const auto h2 = make_model(2.0, Potential::harmonic(1.0), 1, -10, 10);
    CHECK(flow_vector(h2, vec({0.0, 2.0})).velocity[0] == Approx(1.0));
    const auto pend = make_model(1.0, Potential::cosine(1.0, 1.0), 1, -std::numbers::pi, std::numbers::pi);
    const Flow g = flow_vector(pend, vec({std::numbers::pi / 2, 0.0}));
    CHECK(g.velocity[0] == Approx(0.0));
    CHECK(g.velocity[1] == Approx(-1.0));
    CHECK(g.inside_domain);
    CHECK_FALSE(flow_vector(pend, vec({5.0, 0.0})).inside_domain);
  }

  TEST_CASE("Hamiltonian matrix") {
    const auto h = make_model(1.0, Potential::harmonic(1.0), 1, -10, 10);
    const Mat f = hamiltonian_matrix(h, vec({0.3, 0.1}));
    // Flow Jacobian sign convention: d(x)/dt = p/m, d(p)/dt = -V'.
    CHECK(f(0, 1) == Approx(1.0));
    CHECK(f(1, 0) == Approx(-1.0));
    CHECK(f(0, 0) == 0.0);
    CHECK(f(1, 1) == 0.0);
    // Whitened norm equals 1/tau_H for the harmonic oscillator.
    const Mat w = Vec::Constant(2, 1.0).asDiagonal();
    CHECK(op_norm(w * f * w.inverse()) == Approx(1.0));

    const auto quartic = make_model(1.0, Potential::double_well(0.25, 0.0), 1, -2, 2);
    const Mat g = hamiltonian_matrix(quartic, vec({0.0, 0.0}));
    CHECK(g(1, 0) == 0.0);

    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    const auto m3 = make_model(1.3, Potential::cosine(1.0, 2.0), 3, -2, 2);
    const Mat om = symplectic_form(3);
    CHECK(max_abs(om * om + Mat::Identity(6, 6)) == 0.0);
    CHECK(max_abs(om.transpose() + om) == 0.0);
    for (int s = 0; s < 100; ++s) {
      Vec a(6);
      for (int i = 0; i < 6; ++i) a[i] = n(rng);
      const Mat F = hamiltonian_matrix(m3, a);
      CHECK(max_abs(F.transpose() * om + om * F) < 1e-14);
    }
  }
}
