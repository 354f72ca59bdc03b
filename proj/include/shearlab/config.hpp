#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shearlab/functionals.hpp"
#include "shearlab/grid.hpp"
#include "shearlab/shear.hpp"
#include "shearlab/solver.hpp"
#include "shearlab/types.hpp"

namespace shearlab {

/// Flat key-value config with one level of [section] grouping; keys are
/// addressed as "section.key". Unknown keys are preserved (and echoed into
/// the manifest) but never interpreted.
class KeyValueConfig {
 public:
  static KeyValueConfig parse_file(const std::string& path);
  static KeyValueConfig parse_text(const std::string& text);

  bool has(const std::string& key) const;
  std::string get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  Real get_real(const std::string& key) const;
  Real get_real_or(const std::string& key, Real fallback) const;
  long long get_int_or(const std::string& key, long long fallback) const;
  std::vector<Real> get_list(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

enum class InitialPreset { GaussianBump, SineMode, Csv };

struct InitialSpec {
  InitialPreset preset = InitialPreset::GaussianBump;
  Real center = 0;
  Real width = 1;
  Real carrier = 0;
  int mode = 1;
  std::string path;
};

/// Fully resolved run description: grid + flow(s) + mode + schedule +
/// validation constants. Auto policies for dt / t_end / cadence are resolved
/// here so a resolved config is self-contained.
struct RunConfig {
  Regime regime = Regime::Monotone;
  DomainKind domain = DomainKind::TruncatedLine;
  Index grid_n = 512;
  Real half_width = 10;
  ChannelScheme channel_scheme = ChannelScheme::FiniteDifference;

  std::string flow_family = "couette";
  std::map<std::string, Real> flow_params;
  std::string flow_table;  // custom_tabulated only
  std::string reference_family;
  std::map<std::string, Real> reference_params;

  Real nu = 1e-3;
  Real k = 1;
  int sigma = 0;

  InitialSpec initial;

  Real dt = 0;          // resolved, > 0
  Real t_end = 0;       // resolved, > 0
  Index sample_every = 1;
  Scheme scheme = Scheme::StrangCN;

  FlowValidationParams validation;
  bool horizon_structural = false;  // horizon = min(t_end, 1/nu)

  Real taylor_c0 = 4;
  Index spectral_n = 256;
  int spectral_time_samples = 5;
  Real fit_window_cap = 8;

  unsigned long long seed = 0;
  std::string out_dir = "out";

  // sweep section (cmd_sweep only)
  std::string sweep_axis;        // "nu" or "k"
  std::vector<Real> sweep_values;
  std::optional<Real> sweep_k_over_nu;

  std::vector<Real> spectral_eps;  // cmd_spectral, torus form

  static RunConfig resolve(const KeyValueConfig& kv);
  Grid make_grid() const;
  ShearFlow make_flow() const;
  ShearFlow make_reference_flow() const;
  Field make_initial(const Grid& g) const;
};

Real auto_dt(Regime regime, Real nu, Real k);
Real auto_t_end(Regime regime, Real nu, Real k);

std::string regime_name(Regime r);
Regime regime_from_name(const std::string& name);
std::string domain_name(DomainKind d);

}  // namespace shearlab
