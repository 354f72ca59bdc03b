#include "shearlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "shearlab/errors.hpp"

namespace shearlab {
namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::map<std::string, Real> collect_params(const KeyValueConfig& kv, const std::string& section) {
  std::map<std::string, Real> params;
  const std::string prefix = section + ".";
  for (const auto& [key, value] : kv.entries()) {
    if (key.rfind(prefix, 0) != 0) continue;
    const std::string name = key.substr(prefix.size());
    if (name == "family" || name == "table") continue;
    try {
      params[name] = std::stod(value);
    } catch (const std::exception&) {
      throw ConfigError("config: " + key + " is not numeric");
    }
  }
  return params;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_text(const std::string& text) {
  KeyValueConfig kv;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("config: bad section at line " + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected key = value at line " + std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config: empty key at line " + std::to_string(lineno));
    kv.entries_[section.empty() ? key : section + "." + key] = value;
  }
  return kv;
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str());
}

bool KeyValueConfig::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string KeyValueConfig::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("config: missing required key '" + key + "'");
  return it->second;
}

std::string KeyValueConfig::get_or(const std::string& key, const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

Real KeyValueConfig::get_real(const std::string& key) const {
  try {
    return std::stod(get(key));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " is not numeric");
  }
}

Real KeyValueConfig::get_real_or(const std::string& key, Real fallback) const {
  if (!has(key)) return fallback;
  return get_real(key);
}

long long KeyValueConfig::get_int_or(const std::string& key, long long fallback) const {
  if (!has(key)) return fallback;
  try {
    return std::stoll(get(key));
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " is not an integer");
  }
}

std::vector<Real> KeyValueConfig::get_list(const std::string& key) const {
  std::vector<Real> out;
  std::stringstream ss(get(key));
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    if (cell.empty()) continue;
    try {
      out.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw ConfigError("config: " + key + " has a non-numeric entry '" + cell + "'");
    }
  }
  return out;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  entries_[key] = value;
}

std::string regime_name(Regime r) {
  switch (r) {
    case Regime::Monotone: return "monotone";
    case Regime::Nondegenerate: return "nondegenerate";
    case Regime::Taylor: return "taylor";
  }
  return "?";
}

Regime regime_from_name(const std::string& name) {
  if (name == "monotone") return Regime::Monotone;
  if (name == "nondegenerate") return Regime::Nondegenerate;
  if (name == "taylor") return Regime::Taylor;
  throw ConfigError("config: unknown regime '" + name + "'");
}

std::string domain_name(DomainKind d) {
  switch (d) {
    case DomainKind::Torus: return "torus";
    case DomainKind::TruncatedLine: return "truncated_line";
    case DomainKind::Channel: return "channel";
  }
  return "?";
}

Real auto_dt(Regime regime, Real nu, Real k) {
  const Real ak = std::abs(k);
  if (regime == Regime::Taylor) return std::min(1e-2, 0.1 * nu / (ak * ak));
  return std::min(1e-2, 0.1 * std::pow(nu, 1.0 / 3.0) * std::pow(ak, -2.0 / 3.0));
}

Real auto_t_end(Regime regime, Real nu, Real k) {
  switch (regime) {
    case Regime::Monotone: return 5.0 * saturation_time(regime, nu, k);
    case Regime::Nondegenerate: return 20.0 * saturation_time(regime, nu, k);
    case Regime::Taylor: return 6.0 * saturation_time(regime, nu, k);
  }
  throw ConfigError("unknown regime");
}

RunConfig RunConfig::resolve(const KeyValueConfig& kv) {
  RunConfig c;
  c.regime = regime_from_name(kv.get("run.regime"));
  c.out_dir = kv.get_or("run.out", "out");
  c.seed = static_cast<unsigned long long>(kv.get_int_or("run.seed", 0));

  const std::string kind = kv.get("grid.kind");
  if (kind == "torus") c.domain = DomainKind::Torus;
  else if (kind == "truncated_line") c.domain = DomainKind::TruncatedLine;
  else if (kind == "channel") c.domain = DomainKind::Channel;
  else throw ConfigError("config: unknown grid.kind '" + kind + "'");
  c.grid_n = kv.get_int_or("grid.n", 512);
  c.half_width = kv.get_real_or("grid.half_width", 10.0);
  const std::string scheme = kv.get_or("grid.channel_scheme", "fd");
  if (scheme == "fd") c.channel_scheme = ChannelScheme::FiniteDifference;
  else if (scheme == "chebyshev") c.channel_scheme = ChannelScheme::Chebyshev;
  else throw ConfigError("config: unknown grid.channel_scheme '" + scheme + "'");

  // Regime-domain compatibility.
  if (c.regime == Regime::Monotone && c.domain == DomainKind::Channel)
    throw ConfigError("config: monotone regime runs on the torus or truncated line");
  if (c.regime == Regime::Nondegenerate && c.domain != DomainKind::Torus)
    throw ConfigError("config: nondegenerate regime runs on the torus");
  if (c.regime == Regime::Taylor && c.domain != DomainKind::Channel)
    throw ConfigError("config: taylor regime runs on the channel");

  c.flow_family = kv.get("flow.family");
  c.flow_params = collect_params(kv, "flow");
  c.flow_table = kv.get_or("flow.table", "");
  if (kv.has("reference_flow.family")) {
    c.reference_family = kv.get("reference_flow.family");
    c.reference_params = collect_params(kv, "reference_flow");
  }
  if (c.regime == Regime::Nondegenerate && c.reference_family.empty())
    throw ConfigError("config: nondegenerate regime needs a [reference_flow]");

  c.nu = kv.get_real("mode.nu");
  c.k = kv.get_real("mode.k");
  c.sigma = static_cast<int>(kv.get_int_or("mode.sigma", 0));
  if (c.nu <= 0) throw ConfigError("config: mode.nu must be positive");
  if (c.k == 0) throw ConfigError("config: mode.k must be nonzero");

  const std::string preset = kv.get_or("initial.preset", "gaussian_bump");
  if (preset == "gaussian_bump") c.initial.preset = InitialPreset::GaussianBump;
  else if (preset == "sine_mode") c.initial.preset = InitialPreset::SineMode;
  else if (preset == "csv") c.initial.preset = InitialPreset::Csv;
  else throw ConfigError("config: unknown initial.preset '" + preset + "'");
  c.initial.center = kv.get_real_or("initial.center", 0.0);
  c.initial.width = kv.get_real_or("initial.width", 1.0);
  c.initial.carrier = kv.get_real_or("initial.carrier", 0.0);
  c.initial.mode = static_cast<int>(kv.get_int_or("initial.m", 1));
  c.initial.path = kv.get_or("initial.path", "");

  const std::string dt = kv.get_or("sim.dt", "auto");
  c.dt = (dt == "auto") ? auto_dt(c.regime, c.nu, c.k) : std::stod(dt);
  const std::string t_end = kv.get_or("sim.t_end", "auto");
  c.t_end = (t_end == "auto") ? auto_t_end(c.regime, c.nu, c.k) : std::stod(t_end);
  if (c.dt <= 0 || c.t_end < c.dt) throw ConfigError("config: need 0 < dt <= t_end");
  const std::string cadence = kv.get_or("sim.sample_every", "auto");
  if (cadence == "auto") {
    const long long target = kv.get_int_or("sim.target_samples", 4000);
    const long long steps = std::llround(c.t_end / c.dt);
    c.sample_every = std::max<long long>(1, steps / std::max<long long>(target, 1));
  } else {
    c.sample_every = std::stoll(cadence);
  }
  const std::string sch = kv.get_or("sim.scheme", "strang_cn");
  if (sch == "strang_cn") c.scheme = Scheme::StrangCN;
  else if (sch == "lie_cn") c.scheme = Scheme::LieCN;
  else throw ConfigError("config: unknown sim.scheme '" + sch + "'");

  FlowValidationParams& v = c.validation;
  const std::string horizon = kv.get_or("validation.horizon", "auto");
  if (horizon == "auto") {
    v.horizon = c.t_end;
  } else if (horizon == "structural") {
    c.horizon_structural = true;
    v.horizon = std::min(c.t_end, 1.0 / c.nu);
  } else {
    v.horizon = std::stod(horizon);
  }
  v.nu = c.nu;
  v.monotone_lower = kv.get_real_or("validation.c_lower", 1.0);
  v.shape_inner = kv.get_real_or("validation.shape_inner", 4.0);
  v.shape_outer = kv.get_real_or("validation.shape_outer", 4.0);
  v.radius = kv.get_real_or("validation.radius", 1.0);
  v.taylor_dty = kv.get_real_or("validation.taylor_dty", 1.0);
  v.taylor_shape = kv.get_real_or("validation.taylor_shape", 1.0);
  v.degeneracy_order = static_cast<int>(kv.get_int_or("validation.degeneracy_order", 1));
  v.taylor_radius = kv.get_real_or("validation.taylor_radius", 0.5);
  v.expected_critical_points =
      static_cast<int>(kv.get_int_or("validation.expected_critical_points", -1));
  v.time_samples = static_cast<int>(kv.get_int_or("validation.time_samples", 201));
  v.check();

  c.taylor_c0 = kv.get_real_or("functional.c0", 4.0);
  c.spectral_n = kv.get_int_or("functional.spectral_n", 256);
  c.spectral_time_samples = static_cast<int>(kv.get_int_or("functional.spectral_time_samples", 5));
  c.fit_window_cap = kv.get_real_or("fit.window_cap", 8.0);

  if (kv.has("sweep.axis")) {
    c.sweep_axis = kv.get("sweep.axis");
    if (c.sweep_axis != "nu" && c.sweep_axis != "k")
      throw ConfigError("config: sweep.axis must be nu or k");
    c.sweep_values = kv.get_list("sweep.values");
    if (kv.has("sweep.k_over_nu")) c.sweep_k_over_nu = kv.get_real("sweep.k_over_nu");
  }
  if (kv.has("spectral.eps")) c.spectral_eps = kv.get_list("spectral.eps");
  return c;
}

Grid RunConfig::make_grid() const {
  if (domain == DomainKind::TruncatedLine)
    return build_grid(domain, grid_n, half_width);
  return build_grid(domain, grid_n, std::nullopt, channel_scheme);
}

namespace {

ShearFlow flow_from_spec(const std::string& family, const std::map<std::string, Real>& params,
                         const std::string& table) {
  if (family == "custom_tabulated" || family == "custom-tabulated") {
    if (table.empty()) throw ConfigError("config: custom tabulated flow needs flow.table = path");
    return tabulated_flow(table);
  }
  return builtin_flow(family, params);
}

}  // namespace

ShearFlow RunConfig::make_flow() const {
  std::map<std::string, Real> params = flow_params;
  // decaying_sine tracks the run diffusivity unless pinned explicitly.
  if (flow_family == "decaying_sine" && !params.count("nu")) params["nu"] = nu;
  return flow_from_spec(flow_family, params, flow_table);
}

ShearFlow RunConfig::make_reference_flow() const {
  if (reference_family.empty()) throw ConfigError("config: no reference flow configured");
  std::map<std::string, Real> params = reference_params;
  if (reference_family == "decaying_sine" && !params.count("nu")) params["nu"] = nu;
  return flow_from_spec(reference_family, params, "");
}

Field RunConfig::make_initial(const Grid& g) const {
  Field f = Field::Zero(g.n);
  switch (initial.preset) {
    case InitialPreset::GaussianBump: {
      for (Index j = 0; j < g.n; ++j) {
        const Real y = g.points[j];
        const Real envelope = std::exp(-std::pow((y - initial.center) / initial.width, 2));
        const Real theta = initial.carrier * y;
        f[j] = envelope * Complex(std::cos(theta), std::sin(theta));
      }
      break;
    }
    case InitialPreset::SineMode: {
      for (Index j = 0; j < g.n; ++j) {
        const Real y = g.points[j];
        if (g.kind == DomainKind::Torus) {
          f[j] = std::sin(initial.mode * y);
        } else {
          f[j] = std::sin(initial.mode * kPi * (y + g.half_width) / g.length());
        }
      }
      break;
    }
    case InitialPreset::Csv: {
      std::ifstream in(initial.path);
      if (!in) throw ConfigError("initial: cannot open " + initial.path);
      std::string line;
      Index j = 0;
      while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("y,", 0) == 0) continue;
        std::stringstream ss(line);
        std::string cell;
        Real vals[3] = {0, 0, 0};
        for (int cidx = 0; cidx < 3; ++cidx) {
          if (!std::getline(ss, cell, ',')) throw ConfigError("initial: short row in " + initial.path);
          vals[cidx] = std::stod(cell);
        }
        if (j >= g.n) throw ConfigError("initial: too many rows in " + initial.path);
        if (std::abs(vals[0] - g.points[j]) > 1e-9)
          throw ConfigError("initial: csv points do not match the grid");
        f[j] = Complex(vals[1], vals[2]);
        ++j;
      }
      if (j != g.n) throw ConfigError("initial: too few rows in " + initial.path);
      break;
    }
  }
  if (g.boundary == BoundaryKind::Dirichlet) {
    f[0] = Complex(0, 0);
    f[g.n - 1] = Complex(0, 0);
  }
  return f;
}

}  // namespace shearlab
