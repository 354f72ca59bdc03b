#include <doctest.h>

#include <cmath>

#include "shearlab/analysis.hpp"
#include "shearlab/errors.hpp"
#include "support.hpp"

using namespace shearlab;
using shearlab::testing::zero_flow_table;

namespace {

TrajectoryRecord synthetic_exponential(Real rate, Real t_end, Real dt) {
  TrajectoryRecord rec;
  rec.nu = 1e-2;
  rec.k = 1;
  for (Real t = 0; t <= t_end + 1e-12; t += dt) {
    rec.t.push_back(t);
    const Real norm = std::exp(-rate * t);
    rec.l2sq.push_back(norm * norm);
    rec.h1sq.push_back(0);
    rec.cross.push_back(0);
    rec.functional.push_back(norm * norm);
    rec.certificate_margin.push_back(0);
    rec.boundary_mass.push_back(0);
  }
  rec.initial_l2 = 1.0;
  return rec;
}

}  // namespace

TEST_CASE("decay-rate fitting") {
  SUBCASE("recovers an exact exponential") {
    const auto rec = synthetic_exponential(0.1, 100.0, 0.5);
    WindowPolicy policy;
    policy.t_lo = 0;
    policy.t_hi = 100;
    const RateFit fit = fit_decay_rate(rec, 1.0, policy);
    CHECK(fit.delta_hat == doctest::Approx(0.1).epsilon(1e-10));
    CHECK(fit.r_squared >= 1 - 1e-10);
    CHECK(fit.residual_max < 1e-10);
  }
  SUBCASE("slope is invariant under scaling of the data") {
    auto rec = synthetic_exponential(0.1, 100.0, 0.5);
    auto scaled = rec;
    for (auto& v : scaled.l2sq) v *= 1.7e6;
    WindowPolicy policy;
    policy.t_lo = 0;
    policy.t_hi = 100;
    const Real a = fit_decay_rate(rec, 1.0, policy).delta_hat;
    const Real b = fit_decay_rate(scaled, 1.0, policy).delta_hat;
    CHECK(a == doctest::Approx(b).epsilon(1e-13));
  }
  SUBCASE("heat-only run recovers nu (1 + k^2)") {
    const Grid g = build_grid(DomainKind::Torus, 64);
    Field f(g.n);
    for (Index j = 0; j < g.n; ++j) f[j] = std::polar(1.0, g.points[j]);
    SimConfig cfg{1e-2, 400.0, 10};
    const auto rec = simulate(g, f, zero_flow_table(500, 12), 1.0, 1e-2, 1, cfg);
    const RateFit fit = fit_decay_rate(rec, saturation_time(Regime::Monotone, 1e-2, 1));
    CHECK(fit.delta_hat == doctest::Approx(0.02).epsilon(0.01));
  }
  SUBCASE("window restricted to the initial layer is rejected") {
    const auto rec = synthetic_exponential(0.1, 100.0, 0.5);
    WindowPolicy policy;
    policy.t_lo = 0;
    policy.t_hi = 3.0;  // 0.3 e-foldings only
    CHECK_THROWS_AS(fit_decay_rate(rec, 1.0, policy), InsufficientDecayError);
  }
  SUBCASE("too few samples are rejected") {
    const auto rec = synthetic_exponential(0.1, 2.0, 0.5);
    WindowPolicy policy;
    policy.t_lo = 0;
    policy.t_hi = 2.0;
    CHECK_THROWS_AS(fit_decay_rate(rec, 1.0, policy), InsufficientDecayError);
  }
}

TEST_CASE("scaling exponent") {
  SUBCASE("recovers a synthetic 1/3 power") {
    std::vector<std::pair<Real, Real>> pts;
    for (Real nu : {1e-2, 1e-3, 1e-4, 1e-5}) pts.emplace_back(nu, 0.3 * std::cbrt(nu));
    const ScalingFit fit = scaling_exponent(pts);
    CHECK(fit.p_hat == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
    for (Real pref : fit.prefactor) CHECK(pref == doctest::Approx(0.3).epsilon(1e-9));
  }
  SUBCASE("preconditions") {
    std::vector<std::pair<Real, Real>> few = {{1e-2, 0.1}, {1e-3, 0.05}, {1e-4, 0.02}};
    CHECK_THROWS_AS(scaling_exponent(few), ConfigError);
    std::vector<std::pair<Real, Real>> narrow = {
        {1e-2, 0.1}, {8e-3, 0.09}, {6e-3, 0.08}, {4e-3, 0.07}};
    CHECK_THROWS_AS(scaling_exponent(narrow), ConfigError);
    std::vector<std::pair<Real, Real>> negative = {
        {1e-2, 0.1}, {1e-3, -0.05}, {1e-4, 0.02}, {1e-5, 0.01}};
    CHECK_THROWS_AS(scaling_exponent(negative), NumericalError);
  }
}

TEST_CASE("torus spectral constant") {
  SUBCASE("uniform slope gives the analytic constant sqrt(eps)") {
    const Grid g = build_grid(DomainKind::Torus, 128);
    const ShearFlow couette = builtin_flow("couette");
    const Real eps = 1e-4;
    const SpectralEstimate est = spectral_constant_torus(couette, 0.0, eps, g);
    CHECK(est.raw == doctest::Approx(std::sqrt(eps)).epsilon(2e-3));
    CHECK(est.constant == 1.0);
    CHECK(est.converged);
  }
  SUBCASE("static sine yields a certified finite constant") {
    const Grid g = build_grid(DomainKind::Torus, 256);
    const ShearFlow sine = builtin_flow("static_sine");
    const Real eps = 1e-4;
    const SpectralEstimate est = spectral_constant_torus(sine, 0.0, eps, g);
    CHECK(est.constant >= 1.0);
    CHECK(est.constant < 10.0);
    CHECK(spectral_violations(sine, 0.0, eps, g, est, 100, 42) == 0);

    // Bracketing certificate against an independently assembled operator.
    const RealMat d = dense_derivative_matrix(g);
    RealVec pot(g.n);
    for (Index j = 0; j < g.n; ++j) pot[j] = std::pow(std::cos(g.points[j]), 2);
    auto lambda_min_at = [&](Real c) {
      RealMat m = eps * d.transpose() * d;
      for (Index j = 0; j < g.n; ++j) m(j, j) += c * pot[j];
      Eigen::SelfAdjointEigenSolver<RealMat> es(0.5 * (m + m.transpose()),
                                                Eigen::EigenvaluesOnly);
      return es.eigenvalues()(0);
    };
    CHECK(lambda_min_at(est.raw) >= std::sqrt(eps) * (1 - 1e-12));
    CHECK(lambda_min_at(est.raw * (1 - 2e-3)) < std::sqrt(eps));
  }
  SUBCASE("constant stays bounded as eps shrinks") {
    const Grid g = build_grid(DomainKind::Torus, 128);
    const ShearFlow sine = builtin_flow("static_sine");
    Real lo = 1e300, hi = 0;
    for (Real eps : {1e-2, 1e-3, 1e-4}) {
      const Real c = spectral_constant_torus(sine, 0.0, eps, g).constant;
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
    CHECK((hi - lo) / lo < 0.25);
  }
  SUBCASE("vanishing slope cannot satisfy the inequality") {
    const Grid g = build_grid(DomainKind::Torus, 64);
    const ShearFlow zero = zero_flow_table();
    CHECK_THROWS_AS(spectral_constant_torus(zero, 0.0, 1e-3, g), StructuralError);
  }
}

TEST_CASE("channel spectral constant") {
  const Grid g = build_grid(DomainKind::Channel, 257);
  SUBCASE("couette slope folds into the dirichlet gap") {
    const SpectralEstimate est = spectral_constant_channel(builtin_flow("couette"), 0.0, g);
    CHECK(est.constant == 1.0);
    CHECK(est.raw == doctest::Approx(1.0 / ((kPi / 2) * (kPi / 2) + 1.0)).epsilon(0.02));
  }
  SUBCASE("parabola is certified on random fields") {
    const SpectralEstimate est = spectral_constant_channel(builtin_flow("parabola"), 0.0, g);
    CHECK(est.constant >= 1.0);
    CHECK(spectral_violations(builtin_flow("parabola"), 0.0, 0.0, g, est, 100, 7) == 0);
  }
  SUBCASE("zero flow reduces to the poincare constant") {
    const SpectralEstimate est = spectral_constant_channel(zero_flow_table(), 0.0, g);
    CHECK(est.raw == doctest::Approx(std::pow(2 / kPi, 2)).epsilon(0.01));
    CHECK(est.constant == 1.0);
  }
}

TEST_CASE("poincare constant") {
  SUBCASE("fd converges at second order to 2/pi") {
    const Grid g512 = build_grid(DomainKind::Channel, 513);
    const Real c = poincare_constant(g512);
    CHECK(std::abs(c - 2 / kPi) <= 1e-3 * (2 / kPi));

    // Oracle: the discrete eigenvalue of the 3-point laplacian is known in
    // closed form, lambda_1 = (4/h^2) sin^2(pi h / (2 L)).
    const Real h = g512.spacing();
    const Real lam = 4.0 / (h * h) * std::pow(std::sin(kPi * h / 4.0), 2);
    CHECK(c == doctest::Approx(1.0 / std::sqrt(lam)).epsilon(1e-10));

    const Real e128 = std::abs(poincare_constant(build_grid(DomainKind::Channel, 129)) - 2 / kPi);
    const Real e256 = std::abs(poincare_constant(build_grid(DomainKind::Channel, 257)) - 2 / kPi);
    CHECK(e128 / e256 > 3.2);
    CHECK(e128 / e256 < 4.8);
  }
  SUBCASE("chebyshev is spectrally accurate at n = 64") {
    const Grid g = build_grid(DomainKind::Channel, 64, std::nullopt, ChannelScheme::Chebyshev);
    CHECK(std::abs(poincare_constant(g) - 2 / kPi) < 1e-8);
  }
  SUBCASE("torus grids are rejected") {
    CHECK_THROWS_AS(poincare_constant(build_grid(DomainKind::Torus, 64)), ConfigError);
  }
}

TEST_CASE("random fields are reproducible") {
  const Grid g = build_grid(DomainKind::Torus, 64);
  const Field a = random_field(g, 99);
  const Field b = random_field(g, 99);
  const Field c = random_field(g, 100);
  CHECK((a - b).norm() == 0.0);
  CHECK((a - c).norm() > 0.0);
}
