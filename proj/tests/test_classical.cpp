#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "qcc/fokker_planck.hpp"
#include "qcc/langevin.hpp"

using namespace qcc;
using doctest::Approx;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Mat d2(double a, double b) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

PhaseField gaussian_field(const PhaseGrid& g, const Vec& mean, const Mat& cov, Sampling s = Sampling::cell_average) {
  PhaseField f(g);
  add_gaussian(f, 1.0, mean, cov, s);
  return f;
}

double field_moment(const PhaseField& f, int px, int pp) {
  double acc = 0.0;
  for (int i = 0; i < f.grid.nx; ++i)
    for (int j = 0; j < f.grid.np; ++j) acc += f.values(i, j) * std::pow(f.grid.x(i), px) * std::pow(f.grid.p(j), pp);
  return acc * f.grid.cell_area();
}

Mat covariance_ode(const Mat& F, const Mat& D, Mat s, double T) {
  const int n = 20000;
  const double h = T / n;
  auto f = [&](const Mat& x) -> Mat { return F * x + x * F.transpose() + D; };
  for (int i = 0; i < n; ++i) {
    const Mat k1 = f(s), k2 = f(s + 0.5 * h * k1), k3 = f(s + 0.5 * h * k2), k4 = f(s + h * k3);
    s += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return s;
}

}  // namespace

TEST_SUITE("classical") {
  TEST_CASE("L1 distance examples") {
    const PhaseGrid g{200, 200, -8, 8, -8, 8};
    const auto a = gaussian_field(g, v2(0, 0), d2(1, 1));
    CHECK(l1_distance(a, a) == 0.0);
    const auto far = gaussian_field(g, v2(5, 5), d2(0.2, 0.2));
    const auto near = gaussian_field(g, v2(-5, -5), d2(0.2, 0.2));
    CHECK(l1_distance(far, near) == Approx(2.0).epsilon(1e-6));
    const double delta = 0.02;
    const auto b = gaussian_field(g, v2(delta, 0), d2(1, 1));
    CHECK(l1_distance(a, b) == Approx(std::sqrt(2.0 / std::numbers::pi) * delta).epsilon(0.01));
    CHECK_THROWS(l1_distance(a, PhaseField(PhaseGrid{100, 100, -8, 8, -8, 8})));
  }

  TEST_CASE("L1 bounds indicator expectations") {
    const PhaseGrid g{64, 64, -6, 6, -6, 6};
    const auto a = gaussian_field(g, v2(0.3, 0), d2(1, 0.7));
    const auto b = gaussian_field(g, v2(0, -0.2), d2(0.8, 1));
    const double d = l1_distance(a, b);
    std::mt19937_64 rng(1);
    std::bernoulli_distribution coin(0.5);
    for (int trial = 0; trial < 50; ++trial) {
      double ea = 0, eb = 0;
      for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.np; ++j)
          if (coin(rng)) {
            ea += a.values(i, j);
            eb += b.values(i, j);
          }
      CHECK(std::abs(ea - eb) * g.cell_area() <= d + 1e-12);
    }
  }

  TEST_CASE("coarsening and histograms preserve mass") {
    const PhaseGrid g{64, 32, -6, 6, -6, 6};
    const auto a = gaussian_field(g, v2(0.3, 0), d2(1, 0.7));
    const auto c = coarsen(a, 4, 2);
    CHECK(c.grid.nx == 16);
    CHECK(c.grid.np == 16);
    CHECK(c.total_mass() == Approx(a.total_mass()).epsilon(1e-12));
    Mat s(3, 2);
    s << 0.0, 0.0, 1.0, 1.0, 100.0, 0.0;
    const auto h = histogram(s, g);
    CHECK(h.total_mass() == Approx(2.0 / 3.0));
  }

  TEST_CASE("matched Gaussian is stationary under the harmonic flow") {
    const auto model = make_model(1.0, Potential::harmonic(1.0), 1, -6, 6);
    const PhaseGrid g{256, 256, -6, 6, -6, 6};
    const auto f0 = gaussian_field(g, v2(0, 0), d2(0.5, 0.5));
    for (auto scheme : {FpScheme::finite_volume, FpScheme::spectral}) {
      CAPTURE(to_string(scheme));
      FokkerPlanckOptions opt;
      opt.scheme = scheme;
      opt.snapshots = 1;
      FokkerPlanckSolver s(g, model, {}, scheme);
      const double dt = scheme == FpScheme::spectral ? 0.01 : 0.9 * s.max_stable_dt();
      const auto out = evolve_fokker_planck(f0, model, {}, 2 * std::numbers::pi, dt, opt);
      CHECK(l1_distance(out.back(), f0) < 0.01);
      CHECK(out.back().total_mass() == Approx(1.0).epsilon(1e-6));
      CHECK(out.back().min_value() >= -1e-9);
    }
  }

  TEST_CASE("offset Gaussian rotates rigidly") {
    const auto model = make_model(1.0, Potential::harmonic(1.0), 1, -6, 6);
    const PhaseGrid g{256, 256, -6, 6, -6, 6};
    const auto f0 = gaussian_field(g, v2(2, 0), d2(0.3, 0.6), Sampling::point);
    FokkerPlanckOptions opt;
    opt.scheme = FpScheme::spectral;
    opt.snapshots = 1;
    const double T = 0.5 * std::numbers::pi;
    const auto out = evolve_fokker_planck(f0, model, {}, T, 0.01, opt);
    // A quarter turn maps (x, p) to (p, -x).
    const auto ref = gaussian_field(g, v2(0, -2), d2(0.6, 0.3), Sampling::point);
    CHECK(l1_distance(out.back(), ref) < 1e-3);
  }

  TEST_CASE("diffusion spreads variance linearly") {
    const auto model = make_model(1e8, Potential::harmonic(1e-8), 1, -6, 6);
    const PhaseGrid g{128, 128, -6, 6, -6, 6};
    const DiffusionSpec diff{0.4, 0.2, 1.0};
    const auto f0 = gaussian_field(g, v2(0, 0), d2(0.5, 0.5));
    FokkerPlanckOptions opt;
    opt.snapshots = 1;
    FokkerPlanckSolver s(g, model, diff, FpScheme::finite_volume);
    const double T = 1.5;
    const auto out = evolve_fokker_planck(f0, model, diff, T, 0.9 * s.max_stable_dt(), opt);
    const double h2 = g.dx() * g.dx() / 12.0;  // cell-average variance offset
    CHECK(field_moment(out.back(), 2, 0) - h2 == Approx(0.5 + 0.4 * T).epsilon(0.01));
    CHECK(field_moment(out.back(), 0, 2) - h2 == Approx(0.5 + 0.2 * T).epsilon(0.01));
  }

  TEST_CASE("quadratic potential keeps Gaussian moments on the linear ODE") {
    const auto model = make_model(1.0, Potential::harmonic(1.0), 1, -8, 8);
    const PhaseGrid g{256, 256, -8, 8, -8, 8};
    const DiffusionSpec diff{0.05, 0.1, 1.0};
    const auto f0 = gaussian_field(g, v2(1, 0), d2(0.3, 0.6), Sampling::point);
    FokkerPlanckOptions opt;
    opt.scheme = FpScheme::spectral;
    opt.snapshots = 1;
    const double T = 3.0;
    const auto f = evolve_fokker_planck(f0, model, diff, T, 0.01, opt).back();
    Mat F(2, 2);
    F << 0, 1, -1, 0;
    const Mat s = covariance_ode(F, diff.matrix(1), d2(0.3, 0.6), T);
    const double mx = field_moment(f, 1, 0), mp = field_moment(f, 0, 1);
    CHECK(mx == Approx(std::cos(T)).epsilon(0.01));
    CHECK(mp == Approx(-std::sin(T)).epsilon(0.01));
    CHECK(field_moment(f, 2, 0) - mx * mx == Approx(s(0, 0)).epsilon(0.01));
    CHECK(field_moment(f, 0, 2) - mp * mp == Approx(s(1, 1)).epsilon(0.01));
    CHECK(field_moment(f, 1, 1) - mx * mp == Approx(s(0, 1)).epsilon(0.01));
  }

  TEST_CASE("CFL violations are rejected with a suggestion") {
    const auto model = make_model(1.0, Potential::harmonic(1.0), 1, -6, 6);
    const PhaseGrid g{64, 64, -6, 6, -6, 6};
    const auto f0 = gaussian_field(g, v2(0, 0), d2(0.5, 0.5));
    try {
      evolve_fokker_planck(f0, model, {}, 1.0, 1.0);
      FAIL("expected rejection");
    } catch (const std::exception& e) {
      CHECK(std::string(e.what()).find("dt") != std::string::npos);
    }
  }

  TEST_CASE("outflow leak aborts") {
    const auto model = make_model(1.0, Potential::harmonic(1.0), 1, -6, 6);
    const PhaseGrid g{64, 64, -3, 3, -3, 3};
    const auto f0 = gaussian_field(g, v2(2, 0), d2(0.5, 0.5));
    FokkerPlanckSolver s(g, model, {}, FpScheme::finite_volume);
    CHECK_THROWS(evolve_fokker_planck(f0, model, {}, 3.0, 0.9 * s.max_stable_dt()));
  }

  TEST_CASE("Langevin without noise follows the flow") {
    const auto model = make_model(1.0, Potential::double_well(1.0, 1.0), 1, -3, 3);
    LangevinEnsemble e;
    e.samples = v2(0.5, 0.3).transpose();
    const auto out = evolve_langevin_ensemble(e, model, {}, 1.0, 1e-5);
    // RK4 reference.
    Vec y = v2(0.5, 0.3);
    auto rhs = [&](const Vec& s) { return v2(s[1], -model.potential.dv(s[0])); };
    for (int i = 0; i < 10000; ++i) {
      const double h = 1e-4;
      const Vec k1 = rhs(y), k2 = rhs(y + 0.5 * h * k1), k3 = rhs(y + 0.5 * h * k2), k4 = rhs(y + h * k3);
      y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    CHECK(out.samples(0, 0) == Approx(y[0]).epsilon(1e-3));
    CHECK(out.samples(0, 1) == Approx(y[1]).epsilon(1e-3));
    CHECK(out.steps_taken == 100000);
  }

  TEST_CASE("Langevin covariance matches the linear ODE") {
    const auto model = make_model(1.0, Potential::harmonic(1.0), 1, -8, 8);
    const DiffusionSpec diff{0.1, 0.2, 1.0};
    const long M = 200000;
    const auto e0 = sample_gaussian_ensemble(M, v2(1, 0), d2(0.3, 0.6), 7);
    const double T = 1.0;
    const auto e = evolve_langevin_ensemble(e0, model, diff, T, 1e-3);
    Mat F(2, 2);
    F << 0, 1, -1, 0;
    const Mat s = covariance_ode(F, diff.matrix(1), d2(0.3, 0.6), T);
    const Mat c = e.covariance();
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        const double se = std::sqrt((s(a, a) * s(b, b) + s(a, b) * s(a, b)) / M);
        // Euler-Maruyama bias is O(dt), far below the statistical error here.
        CHECK(std::abs(c(a, b) - s(a, b)) < 3.0 * se + 2e-3 * std::abs(s(a, b)));
      }
    }
    CHECK(e.mean()[0] == Approx(std::cos(T)).epsilon(0.01));
  }

  TEST_CASE("Langevin ensembles are reproducible") {
    const auto model = make_model(1.0, Potential::double_well(1.0, 1.0), 1, -3, 3);
    const DiffusionSpec diff{0.1, 0.2, 1.0};
    const auto e0 = sample_gaussian_ensemble(100, v2(1, 0), d2(0.3, 0.6), 11);
    const auto a = evolve_langevin_ensemble(e0, model, diff, 0.5, 1e-3);
    const auto b = evolve_langevin_ensemble(e0, model, diff, 0.5, 1e-3);
    CHECK((a.samples - b.samples).cwiseAbs().maxCoeff() == 0.0);
    const auto e1 = sample_gaussian_ensemble(100, v2(1, 0), d2(0.3, 0.6), 12);
    CHECK((e0.samples - e1.samples).cwiseAbs().maxCoeff() > 0.0);
    CHECK(a.seed == 11);
  }

  TEST_CASE("scheme names") {
    CHECK(fp_scheme_from_string("spectral") == FpScheme::spectral);
    CHECK(to_string(FpScheme::finite_volume) == "finite_volume");
    CHECK_THROWS(fp_scheme_from_string("upwind"));
  }
}
