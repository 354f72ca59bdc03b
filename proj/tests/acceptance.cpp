// Acceptance suite: one self-contained check per criterion, each printing a
// single PASS/FAIL line. Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "shearlab/analysis.hpp"
#include "shearlab/config.hpp"
#include "shearlab/errors.hpp"
#include "shearlab/functionals.hpp"
#include "shearlab/grid.hpp"
#include "shearlab/report.hpp"
#include "shearlab/runner.hpp"
#include "shearlab/shear.hpp"
#include "shearlab/solver.hpp"

using namespace shearlab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string g_root;

std::string workdir(const std::string& name) {
  const std::string path = g_root + "/" + name;
  std::filesystem::remove_all(path);
  std::filesystem::create_directories(path);
  return path;
}

std::string fmt(Real v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

KeyValueConfig couette_reference_config(const std::string& out) {
  return KeyValueConfig::parse_text(
      "[run]\nregime = monotone\nout = " + out +
      "\n[grid]\nkind = truncated_line\nn = 1024\nhalf_width = 10\n"
      "[flow]\nfamily = couette\n"
      "[mode]\nnu = 1e-2\nk = 1\nsigma = 0\n"
      "[initial]\npreset = gaussian_bump\ncenter = 0\nwidth = 1\ncarrier = 2\n"
      "[sim]\ndt = 1e-3\nt_end = 10\nsample_every = 10\n"
      "[validation]\nc_lower = 1.0\ntime_samples = 51\n");
}

// ---- 1. Couette oracle equivalence --------------------------------------

Outcome criterion_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const KeyValueConfig kv = couette_reference_config(workdir("c1"));
  const RunConfig cfg = RunConfig::resolve(kv);
  const RunResult run = cmd_simulate(cfg, kv);

  const Grid g = cfg.make_grid();
  const Field f0 = cfg.make_initial(g);
  Real worst = 0;
  int compared = 0;
  for (int s = 1; s <= 20; ++s) {
    const Real t = 0.5 * s;
    size_t idx = 0;
    Real best = 1e300;
    for (size_t i = 0; i < run.record.size(); ++i) {
      if (std::abs(run.record.t[i] - t) < best) {
        best = std::abs(run.record.t[i] - t);
        idx = i;
      }
    }
    if (best > 1e-9) return {false, "no sample at t = " + fmt(t)};
    const Real numeric = std::sqrt(run.record.l2sq[idx]);
    const Real exact = couette_exact_norm(g, f0, cfg.k, cfg.nu, cfg.sigma, t);
    worst = std::max(worst, std::abs(numeric - exact) / exact);
    ++compared;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool pass = worst <= 1e-3 && compared == 20 && wall < 60.0;
  return {pass, "max relative norm error " + fmt(worst) + " over 20 sample times, " +
                    fmt(wall) + " s"};
}

// ---- 2. Energy identity ---------------------------------------------------

Outcome criterion_energy() {
  const KeyValueConfig kv = couette_reference_config(workdir("c2"));
  const RunConfig cfg = RunConfig::resolve(kv);
  const RunResult coarse = cmd_simulate(cfg, kv);

  KeyValueConfig kv_half = couette_reference_config(workdir("c2_half"));
  kv_half.set("sim.dt", "5e-4");
  const RunConfig cfg_half = RunConfig::resolve(kv_half);
  const RunResult fine = cmd_simulate(cfg_half, kv_half);

  const Real r_coarse = coarse.energy_defect;
  const Real r_fine = fine.energy_defect;
  const bool pass = r_coarse < 1e-3 && r_coarse / r_fine >= 3.0;
  return {pass, "residual " + fmt(r_coarse) + " at dt = 1e-3, improvement factor " +
                    fmt(r_coarse / r_fine) + " after halving dt"};
}

// ---- 3. Monotone scaling ---------------------------------------------------

Outcome criterion_monotone_scaling() {
  const auto t0 = std::chrono::steady_clock::now();
  const KeyValueConfig kv = KeyValueConfig::parse_text(
      "[run]\nregime = monotone\nout = " + workdir("c3") +
      "\n[grid]\nkind = truncated_line\nn = 2049\nhalf_width = 10\n"
      "[flow]\nfamily = perturbed_monotone\na = 0.1\nomega = 1\n"
      "[mode]\nnu = 1e-2\nk = 1\nsigma = 0\n"
      // Zero carrier keeps the packet spectrally centered, so the fitted
      // exponent is not skewed by the one-sided untilting transient.
      "[initial]\npreset = gaussian_bump\ncenter = 0\nwidth = 1\ncarrier = 0\n"
      "[validation]\nc_lower = 0.9\ntime_samples = 51\n"
      "[sweep]\naxis = nu\nvalues = 1e-2,1e-3,1e-4,1e-5\n");
  const RunConfig cfg = RunConfig::resolve(kv);
  const SweepResult sweep = cmd_sweep(cfg, kv);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!sweep.scaling_ok) return {false, "scaling fit unavailable"};
  const Real p = sweep.scaling.p_hat;
  const bool pass = std::abs(p - 1.0 / 3.0) <= 0.05 && wall < 600.0;
  return {pass, "p_hat = " + fmt(p) + " (target 1/3 +- 0.05), " + fmt(wall) + " s"};
}

// ---- 4. Monotone certificate ----------------------------------------------

Outcome criterion_monotone_certificate() {
  const KeyValueConfig kv = KeyValueConfig::parse_text(
      "[run]\nregime = monotone\nout = " + workdir("c4") +
      "\n[grid]\nkind = truncated_line\nn = 1024\nhalf_width = 10\n"
      "[flow]\nfamily = couette\n"
      "[mode]\nnu = 1e-4\nk = 1\nsigma = 0\n"
      "[initial]\npreset = gaussian_bump\ncenter = 0\nwidth = 1\ncarrier = 2\n"
      "[validation]\nc_lower = 1.0\ntime_samples = 51\n");
  const RunConfig cfg = RunConfig::resolve(kv);
  const RunResult run = cmd_simulate(cfg, kv);
  if (!run.validation.has_params) return {false, "no functional parameters derived"};
  const Real delta = run.validation.params.delta;
  const bool pass = run.certificate.pass && std::abs(delta - 1.0 / 24.0) < 1e-12;
  return {pass, "margin " + fmt(run.certificate.margin) + " (limit 1 + 1e-3), delta = " +
                    fmt(delta)};
}

// ---- 5. Nondegenerate scaling and certificate -------------------------------

Outcome criterion_nondegenerate() {
  const auto t0 = std::chrono::steady_clock::now();
  const KeyValueConfig kv = KeyValueConfig::parse_text(
      "[run]\nregime = nondegenerate\nout = " + workdir("c5") +
      "\n[grid]\nkind = torus\nn = 256\n"
      "[flow]\nfamily = decaying_sine\n"
      "[reference_flow]\nfamily = static_sine\n"
      "[mode]\nnu = 1e-2\nk = 1\nsigma = 0\n"
      "[initial]\npreset = gaussian_bump\ncenter = 0\nwidth = 1\ncarrier = 2\n"
      "[validation]\nhorizon = structural\nshape_inner = 16\nshape_outer = 4\nradius = 1\n"
      "expected_critical_points = 2\ntime_samples = 101\n"
      "[functional]\nspectral_n = 256\nspectral_time_samples = 3\n"
      "[sweep]\naxis = nu\nvalues = 1e-2,1e-3,1e-4,1e-5\n");
  const RunConfig cfg = RunConfig::resolve(kv);
  const SweepResult sweep = cmd_sweep(cfg, kv);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!sweep.scaling_ok) return {false, "scaling fit unavailable"};

  bool certificates = true;
  std::string margins;
  for (const auto& p : sweep.points) {
    if (!p.ok || !p.certificate.pass) certificates = false;
    margins += fmt(p.certificate.margin) + " ";
  }
  const Real p_hat = sweep.scaling.p_hat;
  const bool pass = std::abs(p_hat - 0.5) <= 0.05 && certificates && wall < 900.0;
  return {pass, "p_hat = " + fmt(p_hat) + " (target 1/2 +- 0.05), margins " + margins + ", " +
                    fmt(wall) + " s"};
}

// ---- 6. Taylor regime --------------------------------------------------------

Outcome criterion_taylor() {
  std::vector<Real> ratios;
  bool all_pass = true;
  std::string detail;
  int idx = 0;
  for (Real nu : {1e-1, 3e-2, 1e-2}) {
    const Real k = nu / 2;
    const KeyValueConfig kv = KeyValueConfig::parse_text(
        "[run]\nregime = taylor\nout = " + workdir("c6_" + std::to_string(idx++)) +
        "\n[grid]\nkind = channel\nn = 257\n"
        "[flow]\nfamily = parabola\n"
        "[mode]\nnu = " + format_double(nu) + "\nk = " + format_double(k) +
        "\nsigma = 0\n"
        "[initial]\npreset = sine_mode\nm = 1\n"
        "[validation]\ntaylor_dty = 1\ntaylor_shape = 1\ntaylor_radius = 0.5\n"
        "degeneracy_order = 1\ntime_samples = 21\n"
        "[functional]\nspectral_n = 129\nspectral_time_samples = 2\n");
    const RunConfig cfg = RunConfig::resolve(kv);
    const RunResult run = cmd_simulate(cfg, kv);
    if (!run.validation.has_params || !run.certificate.pass) {
      all_pass = false;
      detail += "nu=" + fmt(nu) + ": certificate failed; ";
      continue;
    }
    if (!run.fit) {
      all_pass = false;
      detail += "nu=" + fmt(nu) + ": " + run.fit_error + "; ";
      continue;
    }
    const Real taylor_rate = k * k / nu;
    const Real certified = run.validation.params.delta * taylor_rate;
    if (run.fit->delta_hat < certified) {
      all_pass = false;
      detail += "nu=" + fmt(nu) + ": measured " + fmt(run.fit->delta_hat) +
                " below certified " + fmt(certified) + "; ";
    }
    ratios.push_back(run.fit->delta_hat / taylor_rate);
  }
  if (ratios.size() == 3) {
    Real lo = ratios[0], hi = ratios[0];
    for (Real r : ratios) {
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    const Real spread = (hi - lo) / lo;
    all_pass = all_pass && spread <= 0.15;
    detail += "rate/(k^2/nu) = {" + fmt(ratios[0]) + ", " + fmt(ratios[1]) + ", " +
              fmt(ratios[2]) + "}, spread " + fmt(spread) + " (limit 0.15)";
  } else {
    all_pass = false;
  }
  return {all_pass, detail};
}

// ---- 7. Torus spectral constant ---------------------------------------------

Outcome criterion_spectral() {
  const Grid g = build_grid(DomainKind::Torus, 512);
  const ShearFlow sine = builtin_flow("static_sine");
  std::vector<Real> constants;
  bool ok = true;
  std::string detail;
  for (Real eps : {1e-3, 1e-4, 1e-5}) {
    const SpectralEstimate est = spectral_constant_torus(sine, 0.0, eps, g);
    const int violations = spectral_violations(sine, 0.0, eps, g, est, 100, 2024);
    constants.push_back(est.constant);
    if (!est.converged) {
      ok = false;
      detail += "eps=" + fmt(eps) + " not converged (256 -> 512 moved it >= 1%); ";
    }
    if (violations != 0) {
      ok = false;
      detail += "eps=" + fmt(eps) + ": " + std::to_string(violations) + " violations; ";
    }
  }
  Real lo = constants[0], hi = constants[0];
  for (Real c : constants) {
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  const Real variation = (hi - lo) / lo;
  ok = ok && variation < 0.25;
  detail += "constants {" + fmt(constants[0]) + ", " + fmt(constants[1]) + ", " +
            fmt(constants[2]) + "}, variation " + fmt(variation) + " (limit 0.25)";
  return {ok, detail};
}

// ---- 8. Poincare constant ------------------------------------------------------

Outcome criterion_poincare() {
  const Real target = 2 / kPi;
  const Real cheb =
      poincare_constant(build_grid(DomainKind::Channel, 64, std::nullopt, ChannelScheme::Chebyshev));
  const Real fd = poincare_constant(build_grid(DomainKind::Channel, 513));
  const Real cheb_err = std::abs(cheb - target);
  const Real fd_err = std::abs(fd - target) / target;
  const bool pass = cheb_err <= 1e-6 && fd_err <= 1e-3;
  return {pass, "chebyshev n=64 error " + fmt(cheb_err) + " (limit 1e-6), fd n=512 relative error " +
                    fmt(fd_err) + " (limit 1e-3)"};
}

// ---- 9. Functional property suite -----------------------------------------------

Outcome criterion_functional_properties() {
  const Grid torus = build_grid(DomainKind::Torus, 128);
  const Grid channel = build_grid(DomainKind::Channel, 129);
  const ShearFlow sine = builtin_flow("static_sine");
  const ShearFlow parabola = builtin_flow("parabola");

  ValidationReport mono_rep;
  mono_rep.pass = true;
  mono_rep.measured["sup_dy"] = 1.0;
  mono_rep.measured["c_lower"] = 1.0;
  const FunctionalParams mono = params_monotone(mono_rep);
  const FunctionalParams ndeg = params_nondegenerate(1.5, 1.5, 1.0);
  ValidationReport tay_rep;
  tay_rep.pass = true;
  tay_rep.measured["taylor_dty"] = 1.0;
  tay_rep.measured["sup_dy"] = 2.0;
  tay_rep.measured["sup_dyy"] = 2.0;
  const FunctionalParams taylor = params_taylor(tay_rep, 1.0);

  int sandwich_failures = 0, zero_time_failures = 0, scaling_failures = 0;
  const int fields_per_regime = 1000;
  for (int regime = 0; regime < 3; ++regime) {
    for (int i = 0; i < fields_per_regime; ++i) {
      const unsigned long long seed = 1000ull * regime + i;
      const Grid& g = (regime == 2) ? channel : torus;
      Field f = random_field(g, seed);
      const Real t = 0.37 * (i % 29);
      const Real nu = (regime == 2) ? 1e-2 : 1e-3;
      const Real k = (regime == 2) ? 5e-3 : 1.0;
      const FunctionalParams& params = (regime == 0) ? mono : (regime == 1) ? ndeg : taylor;
      const ShearFlow& flow = (regime == 2) ? parabola : sine;
      const ShearFlow* ref = (regime == 1) ? &sine : nullptr;

      const FunctionalSample s = eval_functional(g, f, t, k, nu, flow, ref, params);
      if (check_equivalence(s, params).min_slack() < -1e-12 * s.l2sq) ++sandwich_failures;
      if (s.value < 0.5 * s.l2sq - 1e-12 * s.l2sq) ++sandwich_failures;

      const FunctionalSample at0 = eval_functional(g, f, 0.0, k, nu, flow, ref, params);
      if (at0.value != at0.l2sq) ++zero_time_failures;

      const Complex c(0.7, 1.3);
      const FunctionalSample scaled =
          eval_functional(g, Field(c * f), t, k, nu, flow, ref, params);
      if (std::abs(scaled.value - std::norm(c) * s.value) > 1e-12 * std::abs(s.value))
        ++scaling_failures;
    }
  }
  const bool pass = sandwich_failures == 0 && zero_time_failures == 0 && scaling_failures == 0;
  return {pass, "sandwich failures " + std::to_string(sandwich_failures) + ", F(0) mismatches " +
                    std::to_string(zero_time_failures) + ", scaling failures " +
                    std::to_string(scaling_failures) + " over 3 x 1000 seeded fields"};
}

// ---- 10. Determinism ---------------------------------------------------------------

Outcome criterion_determinism() {
  const std::string dir_a = workdir("c10_a");
  const std::string dir_b = workdir("c10_b");
  for (const std::string& dir : {dir_a, dir_b}) {
    const KeyValueConfig kv = couette_reference_config(dir);
    const RunConfig cfg = RunConfig::resolve(kv);
    cmd_simulate(cfg, kv);
  }
  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string a = slurp(dir_a + "/trajectory.csv");
  const std::string b = slurp(dir_b + "/trajectory.csv");
  const bool pass = !a.empty() && a == b;
  return {pass, pass ? "trajectory csv byte-identical across reruns (" +
                           std::to_string(a.size()) + " bytes)"
                     : "trajectory csv bytes differ"};
}

}  // namespace

int main(int argc, char** argv) {
  g_root = (argc > 1) ? argv[1]
                      : (std::filesystem::temp_directory_path() / "shearlab_acceptance").string();
  std::filesystem::create_directories(g_root);

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "couette oracle equivalence", criterion_oracle},
      {2, "energy identity residual", criterion_energy},
      {3, "monotone nu^(1/3) scaling", criterion_monotone_scaling},
      {4, "monotone decay certificate", criterion_monotone_certificate},
      {5, "nondegenerate scaling and certificate", criterion_nondegenerate},
      {6, "taylor dispersion regime", criterion_taylor},
      {7, "torus spectral constant", criterion_spectral},
      {8, "poincare constant", criterion_poincare},
      {9, "functional property suite", criterion_functional_properties},
      {10, "determinism", criterion_determinism},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    if (!outcome.pass) ++failures;
    std::printf("[%s] criterion %2d: %s — %s\n", outcome.pass ? "PASS" : "FAIL", c.id, c.name,
                outcome.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures;
}
