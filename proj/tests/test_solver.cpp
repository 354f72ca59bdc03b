#include <doctest.h>

#include <cmath>

#include "shearlab/errors.hpp"
#include "shearlab/solver.hpp"
#include "support.hpp"

using namespace shearlab;
using shearlab::testing::zero_flow_table;

namespace {

Field gaussian_bump(const Grid& g, Real center, Real width, Real carrier) {
  Field f(g.n);
  for (Index j = 0; j < g.n; ++j) {
    const Real y = g.points[j];
    f[j] = std::exp(-std::pow((y - center) / width, 2)) * std::polar(1.0, carrier * y);
  }
  if (g.boundary == BoundaryKind::Dirichlet) {
    f[0] = Complex(0, 0);
    f[g.n - 1] = Complex(0, 0);
  }
  return f;
}

}  // namespace

TEST_CASE("pure diffusion matches the heat kernel on a torus mode") {
  const Grid g = build_grid(DomainKind::Torus, 64);
  const ShearFlow zero = zero_flow_table();
  Field f(g.n);
  for (Index j = 0; j < g.n; ++j) f[j] = std::polar(1.0, g.points[j]);
  const Real nu = 1e-2, t_end = 1.0;
  SimConfig cfg{1e-3, t_end, 100};
  const auto rec = simulate(g, f, zero, 1.0, nu, 1, cfg);
  // sigma = 1, k = 1: the e^{iy} mode decays at nu (1 + k^2).
  const Real expected = std::exp(-nu * 2 * t_end);
  ModeStepper stepper(g, zero, 1.0, nu, 1, cfg);
  Field evolved = f;
  for (int i = 0; i < 1000; ++i) stepper.advance(evolved, i * cfg.dt);
  for (Index j = 0; j < g.n; ++j)
    CHECK(std::abs(evolved[j] - expected * f[j]) < 1e-8);
  CHECK(std::sqrt(rec.l2sq.back()) ==
        doctest::Approx(expected * std::sqrt(2 * kPi)).epsilon(1e-8));
}

TEST_CASE("phase substep preserves the l2 norm") {
  const ShearFlow flow = builtin_flow("static_sine");
  for (auto kind : {DomainKind::Torus, DomainKind::TruncatedLine}) {
    const Grid g = (kind == DomainKind::Torus)
                       ? build_grid(DomainKind::Torus, 128)
                       : build_grid(DomainKind::TruncatedLine, 128, 8.0);
    Field f = shearlab::testing::dirichlet_random(g, 3);
    const Real before = l2_norm(g, f);
    apply_phase(g, flow, 0.37, 2.0, 0.5, f);
    CHECK(std::abs(l2_norm(g, f) - before) <= 1e-14 * before);
  }
}

TEST_CASE("couette oracle") {
  const Grid g = build_grid(DomainKind::TruncatedLine, 512, 10.0);
  const Field f0 = gaussian_bump(g, 0, 1, 2);

  SUBCASE("t = 0 returns the initial data") {
    const Field back = couette_exact(g, f0, 1.0, 1e-2, 0, 0.0);
    Real worst = 0;
    for (Index j = 0; j < g.n; ++j) worst = std::max(worst, std::abs(back[j] - f0[j]));
    CHECK(worst < 1e-11);
  }
  SUBCASE("stepper matches the oracle norm at t = 5") {
    const ShearFlow couette = builtin_flow("couette");
    SimConfig cfg{1e-3, 5.0, 5000};
    const auto rec = simulate(g, f0, couette, 1.0, 1e-2, 0, cfg);
    const Real numeric = std::sqrt(rec.l2sq.back());
    const Real exact = couette_exact_norm(g, f0, 1.0, 1e-2, 0, 5.0);
    CHECK(std::abs(numeric - exact) <= 1e-3 * exact);
  }
  SUBCASE("late-time envelope has slope -nu k^2 / 3 in t^3") {
    const Grid gl = build_grid(DomainKind::TruncatedLine, 1024, 10.0);
    const Field bump = gaussian_bump(gl, 0, 1, 0);
    const Real nu = 1e-5, k = 1.0;
    std::vector<Real> xs, ys;
    for (Real t : {70.0, 90.0, 110.0, 130.0, 150.0, 170.0, 190.0}) {
      xs.push_back(t * t * t);
      ys.push_back(std::log(couette_exact_norm(gl, bump, k, nu, 0, t)));
    }
    Real mx = 0, my = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i] / xs.size();
      my += ys[i] / ys.size();
    }
    Real num = 0, den = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
      num += (xs[i] - mx) * (ys[i] - my);
      den += (xs[i] - mx) * (xs[i] - mx);
    }
    const Real slope = num / den;
    CHECK(slope == doctest::Approx(-nu * k * k / 3).epsilon(0.02));
  }
  SUBCASE("second-order convergence toward the oracle") {
    const ShearFlow couette = builtin_flow("couette");
    const Real t_end = 2.0;
    auto error_at = [&](Real dt) {
      SimConfig cfg{dt, t_end, 1000000};
      const auto rec = simulate(g, f0, couette, 1.0, 1e-2, 0, cfg);
      return std::abs(std::sqrt(rec.l2sq.back()) -
                      couette_exact_norm(g, f0, 1.0, 1e-2, 0, t_end));
    };
    const Real e1 = error_at(4e-3);
    const Real e2 = error_at(2e-3);
    CHECK(e1 / e2 > 3.0);
    CHECK(e1 / e2 < 5.0);
  }
}

TEST_CASE("unconditional l2 non-expansiveness") {
  const ShearFlow flow = builtin_flow("static_sine");
  const Grid g = build_grid(DomainKind::Torus, 64);
  for (Real dt : {1e-3, 0.1, 0.7, 5.0}) {
    for (unsigned long long seed = 0; seed < 5; ++seed) {
      const Field f = random_field(g, seed);
      ModeState state{f, 2.0, 0.05, 0, 0.0};
      SimConfig cfg{dt, 10.0, 1};
      const ModeState next = step(g, state, flow, cfg);
      CHECK(l2_norm(g, next.field) <= l2_norm(g, f) * (1 + 1e-13));
    }
  }
}

TEST_CASE("simulate basics") {
  const Grid g = build_grid(DomainKind::TruncatedLine, 128, 8.0);
  const ShearFlow couette = builtin_flow("couette");

  SUBCASE("zero data stays zero") {
    SimConfig cfg{1e-2, 1.0, 10};
    const auto rec = simulate(g, Field::Zero(g.n), couette, 1.0, 1e-2, 0, cfg);
    for (Real v : rec.l2sq) CHECK(v == 0.0);
    for (Real v : rec.h1sq) CHECK(v == 0.0);
  }
  SUBCASE("norm never increases") {
    SimConfig cfg{1e-2, 2.0, 7};
    const auto rec = simulate(g, gaussian_bump(g, 0, 1, 1), couette, 1.0, 1e-2, 0, cfg);
    for (size_t i = 1; i < rec.size(); ++i) CHECK(rec.l2sq[i] <= rec.l2sq[i - 1] * (1 + 1e-13));
  }
  SUBCASE("records are bit-identical across reruns") {
    SimConfig cfg{1e-2, 2.0, 7};
    const auto a = simulate(g, gaussian_bump(g, 0, 1, 1), couette, 1.0, 1e-2, 0, cfg);
    const auto b = simulate(g, gaussian_bump(g, 0, 1, 1), couette, 1.0, 1e-2, 0, cfg);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
      CHECK(a.l2sq[i] == b.l2sq[i]);
      CHECK(a.h1sq[i] == b.h1sq[i]);
    }
  }
  SUBCASE("initial data touching the boundary is rejected") {
    SimConfig cfg{1e-2, 1.0, 10};
    CHECK_THROWS_AS(simulate(g, gaussian_bump(g, 7.0, 1.0, 0), couette, 1.0, 1e-2, 0, cfg),
                    ConfigError);
  }
  SUBCASE("mass reaching the boundary aborts the run") {
    const Grid small = build_grid(DomainKind::TruncatedLine, 128, 4.0);
    const Field f0 = gaussian_bump(small, 0, 0.72, 0);
    SimConfig cfg{1e-2, 40.0, 10};
    CHECK_THROWS_AS(simulate(small, f0, couette, 1.0, 0.5, 0, cfg), TruncationError);
  }
  SUBCASE("mode invariants are enforced") {
    SimConfig cfg{1e-2, 1.0, 10};
    CHECK_THROWS_AS(simulate(g, gaussian_bump(g, 0, 1, 0), couette, 0.0, 1e-2, 0, cfg),
                    ConfigError);
    CHECK_THROWS_AS(simulate(g, gaussian_bump(g, 0, 1, 0), couette, 1.0, -1e-2, 0, cfg),
                    ConfigError);
    const Grid torus = build_grid(DomainKind::Torus, 64);
    CHECK_THROWS_AS(simulate(torus, random_field(torus, 1), couette, 1.5, 1e-2, 0, cfg),
                    ConfigError);
  }
  SUBCASE("lie splitting also contracts") {
    SimConfig cfg{1e-2, 2.0, 7, Scheme::LieCN};
    const auto rec = simulate(g, gaussian_bump(g, 0, 1, 1), couette, 1.0, 1e-2, 0, cfg);
    for (size_t i = 1; i < rec.size(); ++i) CHECK(rec.l2sq[i] <= rec.l2sq[i - 1] * (1 + 1e-13));
  }
}

TEST_CASE("chebyshev channel stepper matches the dirichlet heat rate") {
  const Grid g = build_grid(DomainKind::Channel, 33, std::nullopt, ChannelScheme::Chebyshev);
  Field f(g.n);
  for (Index j = 0; j < g.n; ++j) f[j] = std::sin(kPi * (g.points[j] + 1) / 2);
  const Real nu = 1e-2, t_end = 10.0;
  SimConfig cfg{1e-3, t_end, 100};
  const auto rec = simulate(g, f, builtin_flow("parabola"), nu / 100, nu, 0, cfg);
  const Real expected = std::exp(-nu * (kPi / 2) * (kPi / 2) * t_end);
  CHECK(std::sqrt(rec.l2sq.back() / rec.l2sq.front()) ==
        doctest::Approx(expected).epsilon(1e-2));
  for (size_t i = 1; i < rec.size(); ++i) CHECK(rec.l2sq[i] <= rec.l2sq[i - 1] * (1 + 1e-13));
}

TEST_CASE("energy identity residual") {
  SUBCASE("heat-only run") {
    const Grid g = build_grid(DomainKind::Torus, 64);
    Field f(g.n);
    for (Index j = 0; j < g.n; ++j) f[j] = std::polar(1.0, g.points[j]);
    SimConfig cfg{1e-3, 0.5, 1};
    const auto rec = simulate(g, f, zero_flow_table(), 1.0, 1e-2, 1, cfg);
    CHECK(energy_residual(rec) < 1e-4);
  }
  SUBCASE("couette run") {
    const Grid g = build_grid(DomainKind::TruncatedLine, 256, 8.0);
    SimConfig cfg{1e-3, 2.0, 10};
    const auto rec =
        simulate(g, gaussian_bump(g, 0, 1, 2), builtin_flow("couette"), 1.0, 1e-2, 0, cfg);
    CHECK(energy_residual(rec) < 1e-3);
  }
  SUBCASE("zero field gives zero residual") {
    const Grid g = build_grid(DomainKind::Torus, 64);
    SimConfig cfg{1e-2, 0.5, 1};
    const auto rec = simulate(g, Field::Zero(g.n), zero_flow_table(), 1.0, 1e-2, 0, cfg);
    CHECK(energy_residual(rec) == 0.0);
  }
}
