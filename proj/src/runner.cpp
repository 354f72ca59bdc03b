#include "shearlab/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "shearlab/errors.hpp"
#include "shearlab/report.hpp"
#include "shearlab/svg.hpp"

namespace shearlab {
namespace {

using nlohmann::json;

std::vector<Real> even_times(Real horizon, int count) {
  std::vector<Real> ts(std::max(count, 2));
  for (size_t i = 0; i < ts.size(); ++i)
    ts[i] = horizon * static_cast<Real>(i) / static_cast<Real>(ts.size() - 1);
  return ts;
}

json report_to_json(const ValidationOutcome& out) {
  json j;
  j["pass"] = out.pass();
  j["failures"] = out.report.failures;
  j["gate_failures"] = out.gate_failures;
  j["measured"] = out.report.measured;
  j["time_samples"] = out.report.time_samples;
  j["space_points"] = out.report.space_points;
  if (out.has_params) {
    j["params"] = {{"alpha", out.params.alpha}, {"beta", out.params.beta},
                   {"gamma", out.params.gamma}, {"delta", out.params.delta},
                   {"c_star", out.params.c_star}, {"c_spec", out.params.c_spec},
                   {"c0", out.params.c0}, {"regime", regime_name(out.params.regime)}};
  }
  j["equivalence"] = {{"c_star", out.equivalence.c_star},
                      {"lattice_max", out.equivalence.lattice_max},
                      {"critical_point_max", out.equivalence.critical_point_max}};
  j["spectral"] = {{"constant", out.spectral.constant}, {"raw", out.spectral.raw},
                   {"eps", out.spectral.eps}, {"n", out.spectral.grid_n},
                   {"converged", out.spectral.converged}};
  return j;
}

void write_validation_files(const std::string& dir, const ValidationOutcome& out) {
  ensure_directory(dir);
  std::ofstream txt(dir + "/validation.txt", std::ios::binary);
  txt << "pass = " << (out.pass() ? "yes" : "no") << "\n";
  for (const auto& f : out.report.failures) txt << "failure: " << f << "\n";
  for (const auto& f : out.gate_failures) txt << "gate failure: " << f << "\n";
  txt << "lattice = " << out.report.time_samples << " time samples x "
      << out.report.space_points << " grid points\n";
  for (const auto& [k, v] : out.report.measured) txt << k << " = " << format_double(v) << "\n";
  if (out.has_params) {
    txt << "alpha = " << format_double(out.params.alpha) << "\n";
    txt << "beta = " << format_double(out.params.beta) << "\n";
    txt << "gamma = " << format_double(out.params.gamma) << "\n";
    txt << "delta = " << format_double(out.params.delta) << "\n";
  }
  std::ofstream js(dir + "/validation.json", std::ios::binary);
  js << report_to_json(out).dump(2) << "\n";
}

std::vector<std::pair<std::string, std::string>> manifest_items(
    const RunConfig& cfg, const KeyValueConfig& raw, const ValidationOutcome& validation,
    bool force, const std::string& status, double wall_seconds,
    const std::vector<std::string>& files) {
  std::vector<std::pair<std::string, std::string>> items;
  items.emplace_back("version", kVersion);
  items.emplace_back("status", status);
  items.emplace_back("force", force ? "true" : "false");
  for (const auto& [k, v] : raw.entries()) items.emplace_back("config." + k, v);
  items.emplace_back("resolved.regime", regime_name(cfg.regime));
  items.emplace_back("resolved.domain", domain_name(cfg.domain));
  items.emplace_back("resolved.nu", format_double(cfg.nu));
  items.emplace_back("resolved.k", format_double(cfg.k));
  items.emplace_back("resolved.sigma", std::to_string(cfg.sigma));
  items.emplace_back("resolved.dt", format_double(cfg.dt));
  items.emplace_back("resolved.t_end", format_double(cfg.t_end));
  items.emplace_back("resolved.sample_every", std::to_string(cfg.sample_every));
  items.emplace_back("resolved.validation_horizon", format_double(cfg.validation.horizon));
  items.emplace_back("resolved.seed", std::to_string(cfg.seed));
  items.emplace_back("validation.pass", validation.pass() ? "true" : "false");
  for (const auto& [k, v] : validation.report.measured)
    items.emplace_back("validation." + k, format_double(v));
  items.emplace_back("equivalence.c_star", format_double(validation.equivalence.c_star));
  items.emplace_back("spectral.constant", format_double(validation.spectral.constant));
  items.emplace_back("spectral.raw", format_double(validation.spectral.raw));
  if (validation.has_params) {
    items.emplace_back("params.alpha", format_double(validation.params.alpha));
    items.emplace_back("params.beta", format_double(validation.params.beta));
    items.emplace_back("params.gamma", format_double(validation.params.gamma));
    items.emplace_back("params.delta", format_double(validation.params.delta));
    items.emplace_back("params.c0", format_double(validation.params.c0));
  }
  if (wall_seconds >= 0) {
    std::ostringstream ss;
    ss << wall_seconds;
    items.emplace_back("wall_clock_sec", ss.str());
  }
  for (const auto& f : files) items.emplace_back("file", f);
  return items;
}

std::string point_dir_name(int index, const std::string& axis, Real value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "point_%02d_%s_%.6g", index, axis.c_str(), value);
  return buf;
}

}  // namespace

int sweep_thread_cap() {
  if (const char* env = std::getenv("SHEARLAB_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

ValidationOutcome run_validation(const RunConfig& cfg, const Grid& g, const ShearFlow& flow,
                                 const ShearFlow* reference) {
  ValidationOutcome out;
  const auto ts = cfg.validation.sample_times();
  switch (cfg.regime) {
    case Regime::Monotone: {
      out.report = validate_monotone(flow, cfg.validation, g, ts);
      if (out.report.pass) {
        out.params = params_monotone(out.report);
        out.has_params = true;
      }
      break;
    }
    case Regime::Nondegenerate: {
      if (!reference) throw ConfigError("nondegenerate validation needs a reference flow");
      out.report = validate_nondegenerate(flow, *reference, cfg.validation, g, ts);
      if (out.report.pass) {
        try {
          out.equivalence = equivalence_constant(flow, *reference, g, ts);
          const Grid sg = build_grid(DomainKind::Torus, cfg.spectral_n);
          const Real eps = cfg.nu / std::abs(cfg.k);
          for (Real t : even_times(cfg.validation.horizon, cfg.spectral_time_samples)) {
            SpectralEstimate est = spectral_constant_torus(*reference, t, eps, sg);
            if (est.constant >= out.spectral.constant) out.spectral = est;
          }
          out.params = params_nondegenerate(out.equivalence.c_star, out.spectral.constant,
                                            out.report.at("sup_dyy_u"));
          out.has_params = true;
        } catch (const StructuralError& e) {
          out.gate_failures.push_back(e.what());
        }
      }
      break;
    }
    case Regime::Taylor: {
      if (std::abs(cfg.k) > cfg.nu)
        out.gate_failures.push_back("taylor regime requires |k| <= nu (got |k| = " +
                                    std::to_string(std::abs(cfg.k)) + ", nu = " +
                                    std::to_string(cfg.nu) + ")");
      out.report = validate_taylor(flow, cfg.validation, g, ts);
      if (out.report.pass && out.gate_failures.empty()) {
        try {
          const Grid sg = build_grid(DomainKind::Channel, cfg.spectral_n, std::nullopt,
                                     cfg.channel_scheme);
          for (Real t : even_times(cfg.validation.horizon, cfg.spectral_time_samples)) {
            SpectralEstimate est = spectral_constant_channel(flow, t, sg);
            if (est.constant >= out.spectral.constant) out.spectral = est;
          }
          out.params = params_taylor(out.report, out.spectral.constant, cfg.taylor_c0);
          out.has_params = true;
        } catch (const StructuralError& e) {
          out.gate_failures.push_back(e.what());
        }
      }
      break;
    }
  }
  return out;
}

ValidationOutcome cmd_validate(const RunConfig& cfg, const KeyValueConfig& raw) {
  const Grid g = cfg.make_grid();
  const ShearFlow flow = cfg.make_flow();
  ShearFlow reference;
  const ShearFlow* ref = nullptr;
  if (cfg.regime == Regime::Nondegenerate) {
    reference = cfg.make_reference_flow();
    ref = &reference;
  }
  ValidationOutcome out = run_validation(cfg, g, flow, ref);
  write_validation_files(cfg.out_dir, out);
  ensure_directory(cfg.out_dir);
  write_key_value(cfg.out_dir + "/manifest.txt",
                  manifest_items(cfg, raw, out, false, "validated", -1,
                                 {"validation.txt", "validation.json", "manifest.txt"}));
  return out;
}

RunResult cmd_simulate(const RunConfig& cfg, const KeyValueConfig& raw, bool force,
                       bool emit_svg) {
  const auto t_start = std::chrono::steady_clock::now();
  const Grid g = cfg.make_grid();
  const ShearFlow flow = cfg.make_flow();
  ShearFlow reference;
  const ShearFlow* ref = nullptr;
  if (cfg.regime == Regime::Nondegenerate) {
    reference = cfg.make_reference_flow();
    ref = &reference;
  }

  RunResult result;
  result.out_dir = cfg.out_dir;
  ensure_directory(cfg.out_dir);
  result.validation = run_validation(cfg, g, flow, ref);
  write_validation_files(cfg.out_dir, result.validation);
  if (!result.validation.pass() && !force) {
    write_key_value(cfg.out_dir + "/manifest.txt",
                    manifest_items(cfg, raw, result.validation, force, "validation_failed", -1,
                                   {"validation.txt", "validation.json", "manifest.txt"}));
    std::string why = "validation failed";
    if (!result.validation.report.failures.empty())
      why += ": " + result.validation.report.failures.front();
    else if (!result.validation.gate_failures.empty())
      why += ": " + result.validation.gate_failures.front();
    throw ValidationFailure(why);
  }

  write_key_value(cfg.out_dir + "/manifest.txt",
                  manifest_items(cfg, raw, result.validation, force, "running", -1, {}));

  SimConfig sim;
  sim.dt = cfg.dt;
  sim.t_end = cfg.t_end;
  sim.sample_every = cfg.sample_every;
  sim.scheme = cfg.scheme;

  Observer observer;
  if (result.validation.has_params)
    observer = functional_observer(flow, ref, result.validation.params);
  const Field initial = cfg.make_initial(g);
  result.record = simulate(g, initial, flow, cfg.k, cfg.nu, cfg.sigma, sim, observer);

  write_trajectory_csv(cfg.out_dir + "/trajectory.csv", result.record);
  result.energy_defect = energy_residual(result.record);
  if (result.validation.has_params) {
    result.certificate = check_certificate(result.record, result.validation.params, 1e-3);
    try {
      result.gronwall = gronwall_diagnostic(result.record, result.validation.params);
    } catch (const ConfigError&) {
      result.gronwall = std::numeric_limits<Real>::quiet_NaN();
    }
  }
  try {
    WindowPolicy policy;
    policy.relative_cap = cfg.fit_window_cap;
    result.fit = fit_decay_rate(result.record, saturation_time(cfg.regime, cfg.nu, cfg.k), policy);
  } catch (const NumericalError& e) {
    result.fit_error = e.what();
  }

  std::vector<std::pair<std::string, std::string>> summary;
  summary.emplace_back("energy_residual", format_double(result.energy_defect));
  summary.emplace_back("certificate_margin", format_double(result.certificate.margin));
  summary.emplace_back("certificate_pass", result.certificate.pass ? "true" : "false");
  summary.emplace_back("best_prefactor", format_double(result.certificate.best_prefactor));
  summary.emplace_back("gronwall_max_violation", format_double(result.gronwall));
  if (result.fit) {
    summary.emplace_back("delta_hat", format_double(result.fit->delta_hat));
    summary.emplace_back("fit_r_squared", format_double(result.fit->r_squared));
    summary.emplace_back("fit_window_lo", format_double(result.fit->t_lo));
    summary.emplace_back("fit_window_hi", format_double(result.fit->t_hi));
  } else {
    summary.emplace_back("fit_error", result.fit_error);
  }
  write_key_value(cfg.out_dir + "/summary.txt", summary);

  std::vector<std::string> files = {"trajectory.csv", "summary.txt", "validation.txt",
                                    "validation.json", "manifest.txt"};
  if (emit_svg) {
    SvgSeries s;
    s.label = "||f||";
    for (size_t i = 0; i < result.record.size(); ++i) {
      s.x.push_back(result.record.t[i]);
      s.y.push_back(std::sqrt(std::max(result.record.l2sq[i], Real(0))));
    }
    write_line_chart(cfg.out_dir + "/norm_decay.svg", "mode amplitude decay", "t", "||f||_2",
                     {s}, false, true);
    files.push_back("norm_decay.svg");
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  write_key_value(cfg.out_dir + "/manifest.txt",
                  manifest_items(cfg, raw, result.validation, force,
                                 result.validation.pass() ? "complete" : "complete_forced", wall,
                                 files));
  return result;
}

SweepResult cmd_sweep(const RunConfig& tmpl, const KeyValueConfig& raw, bool force,
                      bool emit_svg) {
  if (tmpl.sweep_axis.empty()) throw ConfigError("sweep: config needs a [sweep] section");
  if (tmpl.sweep_values.size() < 4) throw ConfigError("sweep: need at least 4 axis points");

  SweepResult result;
  result.out_dir = tmpl.out_dir;
  ensure_directory(tmpl.out_dir);
  result.points.resize(tmpl.sweep_values.size());

  std::atomic<size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mutex;
  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= tmpl.sweep_values.size()) return;
      SweepPoint& point = result.points[i];
      point.axis_value = tmpl.sweep_values[i];
      try {
        KeyValueConfig kv = raw;
        if (tmpl.sweep_axis == "nu") {
          kv.set("mode.nu", format_double(point.axis_value));
          if (tmpl.sweep_k_over_nu)
            kv.set("mode.k", format_double(*tmpl.sweep_k_over_nu * point.axis_value));
        } else {
          kv.set("mode.k", format_double(point.axis_value));
        }
        kv.set("run.out", tmpl.out_dir + "/" +
                              point_dir_name(static_cast<int>(i), tmpl.sweep_axis,
                                             point.axis_value));
        RunConfig cfg = RunConfig::resolve(kv);
        point.nu = cfg.nu;
        point.k = cfg.k;
        point.dir = cfg.out_dir;
        RunResult run = cmd_simulate(cfg, kv, force, false);
        point.certificate = run.certificate;
        point.delta = run.validation.has_params ? run.validation.params.delta : 0;
        if (!run.fit) throw InsufficientDecayError(run.fit_error);
        point.fit = *run.fit;
        point.ok = true;
      } catch (const InsufficientDecayError& e) {
        point.error = e.what();
      } catch (...) {
        std::lock_guard<std::mutex> lock(fatal_mutex);
        if (!fatal) fatal = std::current_exception();
        return;
      }
    }
  };

  const int n_threads =
      std::min<int>(sweep_thread_cap(), static_cast<int>(tmpl.sweep_values.size()));
  std::vector<std::thread> pool;
  for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (fatal) std::rethrow_exception(fatal);

  std::vector<SweepPoint> sorted = result.points;
  std::sort(sorted.begin(), sorted.end(),
            [](const SweepPoint& a, const SweepPoint& b) { return a.axis_value < b.axis_value; });

  std::vector<std::vector<Real>> rows;
  std::vector<std::pair<Real, Real>> pairs;
  for (const auto& p : sorted) {
    if (!p.ok) continue;
    rows.push_back({p.nu, p.k, p.fit.delta_hat, p.fit.r_squared, p.fit.t_lo, p.fit.t_hi});
    pairs.emplace_back(tmpl.sweep_axis == "nu" ? p.nu : p.k, p.fit.delta_hat);
  }
  write_csv(tmpl.out_dir + "/rates.csv",
            {"nu", "k", "delta_hat", "r_squared", "window_lo", "window_hi"}, rows);

  std::vector<std::pair<std::string, std::string>> summary;
  summary.emplace_back("axis", tmpl.sweep_axis);
  summary.emplace_back("points", std::to_string(result.points.size()));
  summary.emplace_back("survivors", std::to_string(pairs.size()));
  for (const auto& p : sorted)
    summary.emplace_back("status." + std::to_string(p.axis_value),
                         p.ok ? "ok" : ("flagged: " + p.error));
  if (pairs.size() >= 4) {
    try {
      result.scaling = scaling_exponent(pairs);
      result.scaling_ok = true;
      summary.emplace_back("p_hat", format_double(result.scaling.p_hat));
      json j;
      j["axis"] = tmpl.sweep_axis;
      j["p_hat"] = result.scaling.p_hat;
      j["prefactors"] = result.scaling.prefactor;
      std::ofstream js(tmpl.out_dir + "/scaling.json", std::ios::binary);
      js << j.dump(2) << "\n";
    } catch (const std::exception& e) {
      // Rates are still the sweep's product; record why the exponent is missing.
      summary.emplace_back("p_hat", std::string("unavailable (") + e.what() + ")");
    }
  } else {
    summary.emplace_back("p_hat", "unavailable (fewer than 4 surviving points)");
  }
  write_key_value(tmpl.out_dir + "/sweep_summary.txt", summary);

  if (emit_svg && result.scaling_ok) {
    SvgSeries s;
    s.label = "delta_hat";
    for (const auto& [x, y] : pairs) {
      s.x.push_back(x);
      s.y.push_back(y);
    }
    write_line_chart(tmpl.out_dir + "/rate_scaling.svg", "decay-rate scaling",
                     tmpl.sweep_axis, "delta_hat", {s}, true, true);
  }
  return result;
}

std::vector<SpectralRow> cmd_spectral(const RunConfig& cfg, const KeyValueConfig& raw) {
  const Grid g = cfg.make_grid();
  const ShearFlow flow = cfg.make_flow();
  const Real t_eval = raw.get_real_or("spectral.t", 0.0);
  ensure_directory(cfg.out_dir);

  std::vector<SpectralRow> out;
  if (cfg.domain == DomainKind::Torus) {
    std::vector<Real> eps_list = cfg.spectral_eps;
    if (eps_list.empty()) eps_list = {cfg.nu / std::abs(cfg.k)};
    for (Real eps : eps_list) {
      SpectralRow row;
      row.eps = eps;
      row.estimate = spectral_constant_torus(flow, t_eval, eps, g);
      row.violations = spectral_violations(flow, t_eval, eps, g, row.estimate, 100, cfg.seed);
      out.push_back(row);
    }
  } else if (cfg.domain == DomainKind::Channel) {
    SpectralRow row;
    row.eps = 0;
    row.estimate = spectral_constant_channel(flow, t_eval, g);
    row.violations = spectral_violations(flow, t_eval, 0, g, row.estimate, 100, cfg.seed);
    out.push_back(row);
  } else {
    throw ConfigError("spectral: torus or channel grid required");
  }

  std::vector<std::vector<Real>> rows;
  for (const auto& r : out)
    rows.push_back({r.eps, static_cast<Real>(r.estimate.grid_n), r.estimate.constant,
                    r.estimate.converged ? 1.0 : 0.0});
  write_csv(cfg.out_dir + "/spectral.csv", {"eps", "n", "constant", "converged"}, rows);

  std::vector<std::pair<std::string, std::string>> txt;
  for (size_t i = 0; i < out.size(); ++i) {
    const std::string p = "row" + std::to_string(i) + ".";
    txt.emplace_back(p + "eps", format_double(out[i].eps));
    txt.emplace_back(p + "constant", format_double(out[i].estimate.constant));
    txt.emplace_back(p + "raw", format_double(out[i].estimate.raw));
    txt.emplace_back(p + "converged", out[i].estimate.converged ? "true" : "false");
    txt.emplace_back(p + "random_field_violations", std::to_string(out[i].violations));
  }
  write_key_value(cfg.out_dir + "/spectral.txt", txt);
  return out;
}

RateFit cmd_fit(const std::string& run_dir, WindowPolicy policy) {
  const auto manifest = read_key_value(run_dir + "/manifest.txt");
  auto need = [&](const std::string& key) {
    auto it = manifest.find(key);
    if (it == manifest.end()) throw ConfigError("fit: manifest missing " + key);
    return it->second;
  };
  const Real nu = std::stod(need("resolved.nu"));
  const Real k = std::stod(need("resolved.k"));
  const Regime regime = regime_from_name(need("resolved.regime"));
  TrajectoryRecord rec = read_trajectory_csv(run_dir + "/trajectory.csv");
  rec.nu = nu;
  rec.k = k;
  const RateFit fit = fit_decay_rate(rec, saturation_time(regime, nu, k), policy);
  write_key_value(run_dir + "/fit.txt",
                  {{"delta_hat", format_double(fit.delta_hat)},
                   {"r_squared", format_double(fit.r_squared)},
                   {"window_lo", format_double(fit.t_lo)},
                   {"window_hi", format_double(fit.t_hi)},
                   {"n_points", std::to_string(fit.n_points)},
                   {"residual_max", format_double(fit.residual_max)}});
  return fit;
}

}  // namespace shearlab
