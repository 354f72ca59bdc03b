#include "shearlab/cli.hpp"

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "shearlab/errors.hpp"
#include "shearlab/report.hpp"
#include "shearlab/runner.hpp"

namespace shearlab {
namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_override;
  std::string dt_override;
  std::string t_end_override;
  std::string seed_override;
  bool force = false;
  bool svg = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_config = true) {
  auto* c = cmd->add_option("--config", opts.config_path, "run config file (key = value sections)");
  if (needs_config) c->required();
  cmd->add_option("--out", opts.out_override, "output directory override");
  cmd->add_option("--dt", opts.dt_override, "time step override");
  cmd->add_option("--t-end", opts.t_end_override, "horizon override");
  cmd->add_option("--seed", opts.seed_override, "seed override");
  cmd->add_flag("--force", opts.force, "run even if validation fails (recorded in the manifest)");
  cmd->add_flag("--svg", opts.svg, "emit svg line charts next to the csv output");
}

KeyValueConfig load_with_overrides(const CommonOpts& opts) {
  KeyValueConfig kv = KeyValueConfig::parse_file(opts.config_path);
  if (!opts.out_override.empty()) kv.set("run.out", opts.out_override);
  if (!opts.dt_override.empty()) kv.set("sim.dt", opts.dt_override);
  if (!opts.t_end_override.empty()) kv.set("sim.t_end", opts.t_end_override);
  if (!opts.seed_override.empty()) kv.set("run.seed", opts.seed_override);
  return kv;
}

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"shearlab: per-wavenumber passive scalar runs under time-dependent shear, "
               "with hypocoercivity decay certificates"};
  app.require_subcommand(1);

  CommonOpts validate_opts, simulate_opts, sweep_opts, spectral_opts;
  std::string fit_dir;
  double fit_t_lo = -1, fit_t_hi = -1;

  auto* validate = app.add_subcommand("validate", "check the structural flow hypotheses");
  add_common(validate, validate_opts);
  auto* simulate = app.add_subcommand("simulate", "validate, integrate, and record a trajectory");
  add_common(simulate, simulate_opts);
  auto* sweep = app.add_subcommand("sweep", "run a nu- or k-sweep and fit the scaling exponent");
  add_common(sweep, sweep_opts);
  auto* spectral = app.add_subcommand("spectral", "estimate spectral-inequality constants");
  add_common(spectral, spectral_opts);
  auto* fit = app.add_subcommand("fit", "re-fit the decay rate of an existing run directory");
  fit->add_option("--run", fit_dir, "run directory containing trajectory.csv + manifest.txt")
      ->required();
  fit->add_option("--t-lo", fit_t_lo, "window start override");
  fit->add_option("--t-hi", fit_t_hi, "window end override");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 4;
  }

  if (validate->parsed()) {
    const KeyValueConfig kv = load_with_overrides(validate_opts);
    const RunConfig cfg = RunConfig::resolve(kv);
    const ValidationOutcome out = cmd_validate(cfg, kv);
    std::cout << (out.pass() ? "validation: pass" : "validation: FAIL") << "\n";
    for (const auto& f : out.report.failures) std::cout << "  " << f << "\n";
    for (const auto& f : out.gate_failures) std::cout << "  " << f << "\n";
    std::cout << "reports in " << cfg.out_dir << "\n";
    return out.pass() ? 0 : 2;
  }
  if (simulate->parsed()) {
    const KeyValueConfig kv = load_with_overrides(simulate_opts);
    const RunConfig cfg = RunConfig::resolve(kv);
    const RunResult res = cmd_simulate(cfg, kv, simulate_opts.force, simulate_opts.svg);
    std::cout << "run complete: " << res.record.size() << " samples in " << res.out_dir << "\n";
    std::cout << "  energy residual " << format_double(res.energy_defect) << "\n";
    if (res.validation.has_params)
      std::cout << "  certificate margin " << format_double(res.certificate.margin)
                << (res.certificate.pass ? " (pass)" : " (FAIL)") << "\n";
    return 0;
  }
  if (sweep->parsed()) {
    const KeyValueConfig kv = load_with_overrides(sweep_opts);
    const RunConfig cfg = RunConfig::resolve(kv);
    const SweepResult res = cmd_sweep(cfg, kv, sweep_opts.force, sweep_opts.svg);
    for (const auto& p : res.points)
      std::cout << "  " << cfg.sweep_axis << " = " << p.axis_value << ": "
                << (p.ok ? "delta_hat = " + format_double(p.fit.delta_hat)
                         : "flagged (" + p.error + ")")
                << "\n";
    if (res.scaling_ok)
      std::cout << "p_hat = " << format_double(res.scaling.p_hat) << "\n";
    std::cout << "sweep results in " << res.out_dir << "\n";
    return 0;
  }
  if (spectral->parsed()) {
    const KeyValueConfig kv = load_with_overrides(spectral_opts);
    const RunConfig cfg = RunConfig::resolve(kv);
    const auto rows = cmd_spectral(cfg, kv);
    for (const auto& r : rows)
      std::cout << "  eps = " << r.eps << ": constant = " << format_double(r.estimate.constant)
                << (r.estimate.converged ? " (converged)" : " (not converged)")
                << ", violations = " << r.violations << "\n";
    std::cout << "spectral table in " << cfg.out_dir << "\n";
    return 0;
  }
  if (fit->parsed()) {
    WindowPolicy policy;
    policy.t_lo = fit_t_lo;
    policy.t_hi = fit_t_hi;
    const RateFit f = cmd_fit(fit_dir, policy);
    std::cout << "delta_hat = " << format_double(f.delta_hat) << " over ["
              << format_double(f.t_lo) << ", " << format_double(f.t_hi) << "], r^2 = "
              << format_double(f.r_squared) << "\n";
    return 0;
  }
  return 4;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  try {
    return dispatch(args);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 4;
  } catch (const ValidationFailure& e) {
    std::cerr << "validation failure: " << e.what() << "\n";
    return 2;
  } catch (const StructuralError& e) {
    std::cerr << "structural error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace shearlab
