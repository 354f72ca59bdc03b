#pragma once

#include <optional>
#include <string>
#include <vector>

#include "shearlab/analysis.hpp"
#include "shearlab/config.hpp"
#include "shearlab/functionals.hpp"
#include "shearlab/shear.hpp"
#include "shearlab/solver.hpp"

namespace shearlab {

inline constexpr const char* kVersion = "0.1.0";

/// A gated run whose validator failed (and --force was not given).
struct ValidationFailure : std::runtime_error {
  explicit ValidationFailure(const std::string& what) : std::runtime_error(what) {}
};

/// Validator verdict plus the constants derived from it (comparability,
/// spectral, functional parameters) when the regime admits them.
struct ValidationOutcome {
  ValidationReport report;
  std::vector<std::string> gate_failures;
  EquivalenceEstimate equivalence;
  SpectralEstimate spectral;
  bool has_params = false;
  FunctionalParams params;

  bool pass() const { return report.pass && gate_failures.empty(); }
};

ValidationOutcome run_validation(const RunConfig& cfg, const Grid& g, const ShearFlow& flow,
                                 const ShearFlow* reference);

/// Validate, write reports under cfg.out_dir, and return the outcome.
ValidationOutcome cmd_validate(const RunConfig& cfg, const KeyValueConfig& raw);

struct RunResult {
  ValidationOutcome validation;
  TrajectoryRecord record;
  CertificateCheck certificate;
  Real energy_defect = 0;
  Real gronwall = std::numeric_limits<Real>::quiet_NaN();
  std::optional<RateFit> fit;
  std::string fit_error;
  std::string out_dir;
};

RunResult cmd_simulate(const RunConfig& cfg, const KeyValueConfig& raw, bool force = false,
                       bool emit_svg = false);

struct SweepPoint {
  Real axis_value = 0;
  Real nu = 0, k = 0;
  bool ok = false;
  std::string error;
  RateFit fit;
  CertificateCheck certificate;
  Real delta = 0;
  std::string dir;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  bool scaling_ok = false;
  ScalingFit scaling;
  std::string out_dir;
};

SweepResult cmd_sweep(const RunConfig& tmpl, const KeyValueConfig& raw, bool force = false,
                      bool emit_svg = false);

struct SpectralRow {
  Real eps = 0;
  SpectralEstimate estimate;
  int violations = 0;
};

std::vector<SpectralRow> cmd_spectral(const RunConfig& cfg, const KeyValueConfig& raw);

RateFit cmd_fit(const std::string& run_dir, WindowPolicy policy = {});

/// Sweep worker cap: SHEARLAB_THREADS when set, hardware concurrency otherwise.
int sweep_thread_cap();

}  // namespace shearlab
