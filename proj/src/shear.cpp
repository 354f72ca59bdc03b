#include "shearlab/shear.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

#include "shearlab/errors.hpp"

namespace shearlab {
namespace {

Real map_get(const std::map<std::string, Real>& m, const std::string& key, Real fallback) {
  auto it = m.find(key);
  return it == m.end() ? fallback : it->second;
}

Real map_require(const std::map<std::string, Real>& m, const std::string& key,
                 const std::string& family) {
  auto it = m.find(key);
  if (it == m.end()) throw ConfigError("flow " + family + ": missing parameter '" + key + "'");
  return it->second;
}

// Natural cubic spline on strictly increasing nodes.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<Real> xs, std::vector<Real> ys) : x_(std::move(xs)), y_(std::move(ys)) {
    const size_t n = x_.size();
    m_.assign(n, 0.0);
    if (n < 3) return;
    std::vector<Real> diag(n, 0), rhs(n, 0), sub(n, 0), sup(n, 0);
    diag[0] = diag[n - 1] = 1.0;
    for (size_t i = 1; i + 1 < n; ++i) {
      const Real hl = x_[i] - x_[i - 1];
      const Real hr = x_[i + 1] - x_[i];
      sub[i] = hl / 6;
      diag[i] = (hl + hr) / 3;
      sup[i] = hr / 6;
      rhs[i] = (y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl;
    }
    for (size_t i = 1; i < n; ++i) {
      const Real w = sub[i] / diag[i - 1];
      diag[i] -= w * sup[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    m_[n - 1] = rhs[n - 1] / diag[n - 1];
    for (size_t i = n - 1; i-- > 0;) m_[i] = (rhs[i] - sup[i] * m_[i + 1]) / diag[i];
  }

  Real eval(Real x) const { return piece(x, 0); }
  Real deriv1(Real x) const { return piece(x, 1); }
  Real deriv2(Real x) const { return piece(x, 2); }

 private:
  Real piece(Real x, int order) const {
    const size_t n = x_.size();
    if (n == 0) return 0;
    size_t i = std::upper_bound(x_.begin(), x_.end(), x) - x_.begin();
    i = std::min(std::max<size_t>(i, 1), n - 1) - 1;
    const Real h = x_[i + 1] - x_[i];
    const Real a = (x_[i + 1] - x) / h;
    const Real b = (x - x_[i]) / h;
    switch (order) {
      case 0:
        return a * y_[i] + b * y_[i + 1] +
               ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6;
      case 1:
        return (y_[i + 1] - y_[i]) / h +
               ((3 * b * b - 1) * m_[i + 1] - (3 * a * a - 1) * m_[i]) * h / 6;
      default:
        return a * m_[i] + b * m_[i + 1];
    }
  }

  std::vector<Real> x_, y_;
  std::vector<Real> m_;
};

struct ShearTable {
  std::vector<Real> ts;
  std::vector<CubicSpline> slices;  // one spline in y per tabulated time

  size_t cell(Real t) const {
    size_t j = std::upper_bound(ts.begin(), ts.end(), t) - ts.begin();
    return std::min(std::max<size_t>(j, 1), ts.size() - 1) - 1;
  }
};

void self_check(const ShearFlow& flow, const std::vector<Real>& ts, const RealVec& ys, Real tol) {
  const Real err = flow_consistency_error(flow, ts, ys);
  if (!(err <= tol))
    throw NumericalError("flow " + flow.name + ": derivative closures disagree with eval (err=" +
                         std::to_string(err) + ")");
}

std::vector<Real> default_check_times() { return {0.0, 0.37, 1.13, 2.61}; }

RealVec default_check_lattice() { return RealVec::LinSpaced(41, -kPi, kPi); }

}  // namespace

ShearFlow builtin_flow(const std::string& family, const std::map<std::string, Real>& params) {
  ShearFlow flow;
  flow.name = family;
  flow.family_params = params;
  if (family == "couette") {
    flow.eval = [](Real, Real y) { return y; };
    flow.d_y = [](Real, Real) { return 1.0; };
    flow.d_yy = [](Real, Real) { return 0.0; };
    flow.d_ty = [](Real, Real) { return 0.0; };
  } else if (family == "perturbed_monotone") {
    const Real a = map_get(params, "a", 0.1);
    const Real omega = map_get(params, "omega", 1.0);
    flow.family_params["a"] = a;
    flow.family_params["omega"] = omega;
    flow.eval = [a, omega](Real t, Real y) { return y + a * std::sin(omega * t) * std::sin(y); };
    flow.d_y = [a, omega](Real t, Real y) { return 1.0 + a * std::sin(omega * t) * std::cos(y); };
    flow.d_yy = [a, omega](Real t, Real y) { return -a * std::sin(omega * t) * std::sin(y); };
    flow.d_ty = [a, omega](Real t, Real y) {
      return a * omega * std::cos(omega * t) * std::cos(y);
    };
  } else if (family == "decaying_sine") {
    const Real nu = map_require(params, "nu", family);
    flow.eval = [nu](Real t, Real y) { return std::exp(-nu * t) * std::sin(y); };
    flow.d_y = [nu](Real t, Real y) { return std::exp(-nu * t) * std::cos(y); };
    flow.d_yy = [nu](Real t, Real y) { return -std::exp(-nu * t) * std::sin(y); };
    flow.d_ty = [nu](Real t, Real y) { return -nu * std::exp(-nu * t) * std::cos(y); };
  } else if (family == "static_sine") {
    flow.eval = [](Real, Real y) { return std::sin(y); };
    flow.d_y = [](Real, Real y) { return std::cos(y); };
    flow.d_yy = [](Real, Real y) { return -std::sin(y); };
    flow.d_ty = [](Real, Real) { return 0.0; };
  } else if (family == "parabola") {
    flow.eval = [](Real, Real y) { return 1.0 - y * y; };
    flow.d_y = [](Real, Real y) { return -2.0 * y; };
    flow.d_yy = [](Real, Real) { return -2.0; };
    flow.d_ty = [](Real, Real) { return 0.0; };
  } else {
    throw ConfigError("unknown flow family '" + family + "'");
  }
  self_check(flow, default_check_times(), default_check_lattice(), 1e-6);
  return flow;
}

ShearFlow tabulated_flow(const std::vector<Real>& ts, const std::vector<Real>& ys,
                         const std::vector<std::vector<Real>>& values, const std::string& name) {
  if (ts.size() < 2 || ys.size() < 4) throw ConfigError("tabulated flow: lattice too small");
  if (values.size() != ts.size()) throw ConfigError("tabulated flow: row count mismatch");
  auto table = std::make_shared<ShearTable>();
  table->ts = ts;
  for (size_t j = 0; j < ts.size(); ++j) {
    if (values[j].size() != ys.size()) throw ConfigError("tabulated flow: column count mismatch");
    table->slices.emplace_back(std::vector<Real>(ys), std::vector<Real>(values[j]));
  }

  ShearFlow flow;
  flow.name = name;
  flow.tabulated = true;
  flow.eval = [table](Real t, Real y) {
    const size_t j = table->cell(t);
    const Real dt = table->ts[j + 1] - table->ts[j];
    const Real s = std::clamp((t - table->ts[j]) / dt, Real(0), Real(1));
    return (1 - s) * table->slices[j].eval(y) + s * table->slices[j + 1].eval(y);
  };
  flow.d_y = [table](Real t, Real y) {
    const size_t j = table->cell(t);
    const Real dt = table->ts[j + 1] - table->ts[j];
    const Real s = std::clamp((t - table->ts[j]) / dt, Real(0), Real(1));
    return (1 - s) * table->slices[j].deriv1(y) + s * table->slices[j + 1].deriv1(y);
  };
  flow.d_yy = [table](Real t, Real y) {
    const size_t j = table->cell(t);
    const Real dt = table->ts[j + 1] - table->ts[j];
    const Real s = std::clamp((t - table->ts[j]) / dt, Real(0), Real(1));
    return (1 - s) * table->slices[j].deriv2(y) + s * table->slices[j + 1].deriv2(y);
  };
  flow.d_ty = [table](Real t, Real y) {
    const size_t j = table->cell(t);
    const Real dt = table->ts[j + 1] - table->ts[j];
    return (table->slices[j + 1].deriv1(y) - table->slices[j].deriv1(y)) / dt;
  };

  // Tabulated mode carries a looser consistency tolerance; check on a
  // knot-avoiding lattice inside the table.
  std::vector<Real> check_ts;
  for (size_t j = 0; j + 1 < ts.size() && check_ts.size() < 4; ++j)
    check_ts.push_back(0.5 * (ts[j] + ts[j + 1]));
  const Real lo = ys.front() + 0.05 * (ys.back() - ys.front());
  const Real hi = ys.back() - 0.05 * (ys.back() - ys.front());
  self_check(flow, check_ts, RealVec::LinSpaced(33, lo, hi), 1e-4);
  return flow;
}

ShearFlow tabulated_flow(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw ConfigError("tabulated flow: cannot open " + csv_path);
  std::vector<std::array<Real, 3>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    if (line.find("t,") == 0 || line.find("t ,") == 0) continue;  // header
    std::array<Real, 3> row{};
    std::stringstream ss(line);
    std::string cell;
    for (int c = 0; c < 3; ++c) {
      if (!std::getline(ss, cell, ',')) throw ConfigError("tabulated flow: short row in " + csv_path);
      row[c] = std::stod(cell);
    }
    rows.push_back(row);
  }
  if (rows.empty()) throw ConfigError("tabulated flow: no data rows in " + csv_path);

  std::vector<Real> ts, ys;
  for (const auto& r : rows) {
    if (ts.empty() || r[0] > ts.back()) ts.push_back(r[0]);
  }
  for (const auto& r : rows) {
    if (r[0] != rows[0][0]) break;
    ys.push_back(r[1]);
  }
  if (ts.size() * ys.size() != rows.size())
    throw ConfigError("tabulated flow: rows do not form a regular t x y lattice");
  std::vector<std::vector<Real>> values(ts.size(), std::vector<Real>(ys.size()));
  for (size_t j = 0; j < ts.size(); ++j)
    for (size_t i = 0; i < ys.size(); ++i) values[j][i] = rows[j * ys.size() + i][2];
  return tabulated_flow(ts, ys, values, "tabulated:" + csv_path);
}

Real flow_consistency_error(const ShearFlow& flow, const std::vector<Real>& ts, const RealVec& ys) {
  const Real h = 1e-4;
  Real worst = 0;
  for (Real t : ts) {
    for (Index i = 0; i < ys.size(); ++i) {
      const Real y = ys[i];
      const Real fd_y = (flow.eval(t, y + h) - flow.eval(t, y - h)) / (2 * h);
      const Real fd_yy =
          (flow.eval(t, y + h) - 2 * flow.eval(t, y) + flow.eval(t, y - h)) / (h * h);
      const Real fd_ty = (flow.eval(t + h, y + h) - flow.eval(t + h, y - h) -
                          flow.eval(t - h, y + h) + flow.eval(t - h, y - h)) /
                         (4 * h * h);
      worst = std::max(worst, std::abs(fd_y - flow.d_y(t, y)));
      worst = std::max(worst, std::abs(fd_yy - flow.d_yy(t, y)));
      worst = std::max(worst, std::abs(fd_ty - flow.d_ty(t, y)));
    }
  }
  return worst;
}

Real circle_distance(Real a, Real b) {
  Real d = std::fmod(std::abs(a - b), 2 * kPi);
  return std::min(d, 2 * kPi - d);
}

namespace {

Real wrap_to_torus(Real y) {
  Real w = std::fmod(y + kPi, 2 * kPi);
  if (w < 0) w += 2 * kPi;
  return w - kPi;
}

Real point_distance(const Grid& g, Real a, Real b) {
  return g.kind == DomainKind::Torus ? circle_distance(a, b) : std::abs(a - b);
}

Real nearest_root_distance(const Grid& g, Real y, const std::vector<Real>& roots) {
  Real best = std::numeric_limits<Real>::infinity();
  for (Real r : roots) best = std::min(best, point_distance(g, y, r));
  return best;
}

Real bisect_root(const std::function<Real(Real)>& fn, Real lo, Real hi) {
  Real flo = fn(lo);
  for (int it = 0; it < 200; ++it) {
    const Real mid = 0.5 * (lo + hi);
    const Real fmid = fn(mid);
    if (std::abs(fmid) <= 1e-12 || hi - lo < 1e-14) return mid;
    if ((flo < 0) == (fmid < 0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<Real> critical_points(const ShearFlow& flow, Real t, const Grid& g, int max_roots) {
  auto slope = [&](Real y) { return flow.d_y(t, y); };
  const Index n = g.n;
  std::vector<Real> roots;
  const Index segments = (g.kind == DomainKind::Torus) ? n : n - 1;
  for (Index j = 0; j < segments; ++j) {
    const Real ya = g.points[j];
    const Real yb = (j + 1 < n) ? g.points[j + 1] : g.points[0] + 2 * kPi;
    const Real da = slope(ya);
    const Real db = slope(yb);
    Real root;
    if (da == 0.0) {
      root = ya;
    } else if ((da < 0) != (db < 0)) {
      root = bisect_root(slope, ya, yb);
    } else {
      continue;
    }
    if (g.kind == DomainKind::Torus) root = wrap_to_torus(root);
    roots.push_back(root);
    if (static_cast<int>(roots.size()) > max_roots)
      throw StructuralError("degenerate flow: more than " + std::to_string(max_roots) +
                            " critical points at t=" + std::to_string(t));
  }
  std::sort(roots.begin(), roots.end());
  std::vector<Real> unique;
  for (Real r : roots) {
    if (unique.empty() || point_distance(g, r, unique.back()) > 1e-8) unique.push_back(r);
  }
  if (g.kind == DomainKind::Torus && unique.size() > 1 &&
      circle_distance(unique.front(), unique.back()) <= 1e-8)
    unique.pop_back();
  return unique;
}

CriticalPointTrack track_critical_points(const ShearFlow& flow, const std::vector<Real>& ts,
                                         const Grid& g, Real matching_radius) {
  CriticalPointTrack track;
  for (Real t : ts) {
    auto roots = critical_points(flow, t, g);
    if (!track.points.empty() && track.points.back().size() == roots.size()) {
      for (size_t i = 0; i < roots.size(); ++i) {
        if (point_distance(g, roots[i], track.points.back()[i]) > matching_radius)
          throw StructuralError("critical-point track jumped more than the matching radius");
      }
    }
    track.times.push_back(t);
    track.count_per_time.push_back(static_cast<int>(roots.size()));
    track.points.push_back(std::move(roots));
  }
  return track;
}

void FlowValidationParams::check() const {
  if (horizon <= 0 || nu <= 0) throw ConfigError("validation: horizon and nu must be positive");
  if (monotone_lower <= 0) throw ConfigError("validation: monotone slope floor must be positive");
  if (shape_inner < 1 || shape_outer < 1 || taylor_dty < 1 || taylor_shape < 1)
    throw ConfigError("validation: shape constants must be >= 1");
  if (radius <= 0 || taylor_radius <= 0) throw ConfigError("validation: radii must be positive");
  if (degeneracy_order < 1) throw ConfigError("validation: degeneracy order must be >= 1");
  if (time_samples < 2) throw ConfigError("validation: need at least 2 time samples");
}

std::vector<Real> FlowValidationParams::sample_times() const {
  std::vector<Real> ts(time_samples);
  for (int i = 0; i < time_samples; ++i)
    ts[i] = horizon * static_cast<Real>(i) / static_cast<Real>(time_samples - 1);
  return ts;
}

Real ValidationReport::at(const std::string& key) const {
  auto it = measured.find(key);
  if (it == measured.end()) throw ConfigError("validation report has no entry '" + key + "'");
  return it->second;
}

namespace {

// Re-run the derivative-consistency self test on a coarse sub-lattice and
// record it; tabulated flows carry the looser 1e-4 tolerance.
void record_flow_consistency(ValidationReport& rep, const ShearFlow& flow,
                             const FlowValidationParams& p, const Grid& g,
                             const std::string& label) {
  std::vector<Real> ts;
  for (int i = 0; i < 5; ++i) ts.push_back(p.horizon * (i + 0.5) / 5.0);  // avoid t-knots/edges
  const Real margin = g.kind == DomainKind::Torus ? 0.0 : 0.02 * g.length();
  const RealVec ys = RealVec::LinSpaced(33, g.points[0] + margin, g.points[g.n - 1] - margin);
  const Real err = flow_consistency_error(flow, ts, ys);
  const Real tol = flow.tabulated ? 1e-4 : 1e-6;
  rep.measured["flow_consistency" + label] = err;
  rep.measured["flow_consistency_tol" + label] = tol;
  if (err > tol)
    rep.failures.push_back("flow " + flow.name + ": derivative closures deviate from eval by " +
                           std::to_string(err) + " (tolerance " + std::to_string(tol) + ")");
}

}  // namespace

ValidationReport validate_monotone(const ShearFlow& flow, const FlowValidationParams& p,
                                   const Grid& g, const std::vector<Real>& ts) {
  p.check();
  ValidationReport rep;
  rep.time_samples = static_cast<int>(ts.size());
  rep.space_points = g.n;
  Real inf_dy = std::numeric_limits<Real>::infinity();
  Real sup_v = 0, sup_dy = 0, sup_dyy = 0, sup_dty = 0;
  for (Real t : ts) {
    for (Index j = 0; j < g.n; ++j) {
      const Real y = g.points[j];
      inf_dy = std::min(inf_dy, std::abs(flow.d_y(t, y)));
      sup_v = std::max(sup_v, std::abs(flow.eval(t, y)));
      sup_dy = std::max(sup_dy, std::abs(flow.d_y(t, y)));
      sup_dyy = std::max(sup_dyy, std::abs(flow.d_yy(t, y)));
      sup_dty = std::max(sup_dty, std::abs(flow.d_ty(t, y)));
    }
  }
  rep.measured["inf_dy"] = inf_dy;
  rep.measured["sup_v"] = sup_v;
  rep.measured["sup_dy"] = sup_dy;
  rep.measured["sup_dyy"] = sup_dyy;
  rep.measured["sup_dty"] = sup_dty;
  rep.measured["c_lower"] = p.monotone_lower;
  if (inf_dy < p.monotone_lower)
    rep.failures.push_back("inf |dV/dy| = " + std::to_string(inf_dy) + " below floor " +
                           std::to_string(p.monotone_lower));
  record_flow_consistency(rep, flow, p, g, "");
  rep.pass = rep.failures.empty();
  return rep;
}

ValidationReport validate_nondegenerate(const ShearFlow& flow_v, const ShearFlow& flow_u,
                                        const FlowValidationParams& p, const Grid& g,
                                        const std::vector<Real>& ts) {
  p.check();
  if (g.kind != DomainKind::Torus)
    throw ConfigError("nondegenerate validation is defined on the torus");
  ValidationReport rep;
  rep.time_samples = static_cast<int>(ts.size());
  rep.space_points = g.n;

  int count = -1;
  Real worst_match = 0;
  Real sign_min = std::numeric_limits<Real>::infinity();
  Real sup_dty_u = 0, sup_dyy_u = 0, sup_dy_u = 0, sup_dy_v = 0, sup_dyy_v = 0;
  Real inner_lo_margin = std::numeric_limits<Real>::infinity();
  Real inner_hi_margin = std::numeric_limits<Real>::infinity();
  Real outer_lo_margin = std::numeric_limits<Real>::infinity();
  Real outer_hi_margin = std::numeric_limits<Real>::infinity();
  bool structure_ok = true;

  for (Real t : ts) {
    std::vector<Real> roots_v, roots_u;
    try {
      roots_v = critical_points(flow_v, t, g);
      roots_u = critical_points(flow_u, t, g);
    } catch (const StructuralError& e) {
      rep.failures.push_back(e.what());
      structure_ok = false;
      break;
    }
    if (roots_v.size() != roots_u.size()) {
      rep.failures.push_back("critical-point counts differ at t=" + std::to_string(t) + " (" +
                             std::to_string(roots_v.size()) + " vs " +
                             std::to_string(roots_u.size()) + ")");
      structure_ok = false;
      break;
    }
    if (count < 0) count = static_cast<int>(roots_v.size());
    if (static_cast<int>(roots_v.size()) != count) {
      rep.failures.push_back("critical-point count changes over time");
      structure_ok = false;
      break;
    }
    for (size_t i = 0; i < roots_v.size(); ++i)
      worst_match = std::max(worst_match, point_distance(g, roots_v[i], roots_u[i]));

    for (Index j = 0; j < g.n; ++j) {
      const Real y = g.points[j];
      const Real dv = flow_v.d_y(t, y);
      const Real du = flow_u.d_y(t, y);
      sign_min = std::min(sign_min, dv * du);
      sup_dty_u = std::max(sup_dty_u, std::abs(flow_u.d_ty(t, y)));
      sup_dyy_u = std::max(sup_dyy_u, std::abs(flow_u.d_yy(t, y)));
      sup_dyy_v = std::max(sup_dyy_v, std::abs(flow_v.d_yy(t, y)));
      sup_dy_u = std::max(sup_dy_u, std::abs(du));
      sup_dy_v = std::max(sup_dy_v, std::abs(dv));
      const Real d = nearest_root_distance(g, y, roots_v);
      if (d <= 1e-8) continue;  // two-sided bound degenerates to 0 <= 0
      for (Real dz : {dv, du}) {
        const Real sq = dz * dz;
        if (d < p.radius) {
          inner_lo_margin = std::min(inner_lo_margin, sq - d * d / p.shape_inner);
          inner_hi_margin = std::min(inner_hi_margin, p.shape_inner * d * d - sq);
        } else {
          outer_lo_margin = std::min(outer_lo_margin, std::abs(dz) - 1 / p.shape_outer);
          outer_hi_margin = std::min(outer_hi_margin, p.shape_outer - std::abs(dz));
        }
      }
    }
  }

  rep.measured["n_critical"] = count;
  rep.measured["worst_critical_match"] = worst_match;
  rep.measured["sign_min"] = sign_min;
  rep.measured["sup_dty_u"] = sup_dty_u;
  rep.measured["sup_dyy_u"] = sup_dyy_u;
  rep.measured["sup_dyy_v"] = sup_dyy_v;
  rep.measured["sup_dy_u"] = sup_dy_u;
  rep.measured["sup_dy_v"] = sup_dy_v;
  rep.measured["dty_bound"] = std::pow(p.nu, 0.75);
  rep.measured["inner_lo_margin"] = inner_lo_margin;
  rep.measured["inner_hi_margin"] = inner_hi_margin;
  rep.measured["outer_lo_margin"] = outer_lo_margin;
  rep.measured["outer_hi_margin"] = outer_hi_margin;

  if (structure_ok) {
    if (p.expected_critical_points >= 0 && count != p.expected_critical_points)
      rep.failures.push_back("critical-point count " + std::to_string(count) +
                             " differs from expected " +
                             std::to_string(p.expected_critical_points));
    if (worst_match > 1e-8)
      rep.failures.push_back("critical points of V and U differ by " + std::to_string(worst_match));
    if (sign_min < -1e-12) rep.failures.push_back("dV/dy and dU/dy disagree in sign");
    if (sup_dty_u > std::pow(p.nu, 0.75))
      rep.failures.push_back("|d_ty U| exceeds nu^(3/4)");
    if (inner_lo_margin < 0 || inner_hi_margin < 0)
      rep.failures.push_back("quadratic pinch violated near a critical point");
    if (outer_lo_margin < 0 || outer_hi_margin < 0)
      rep.failures.push_back("slope band violated away from critical points");
  }
  record_flow_consistency(rep, flow_v, p, g, "");
  record_flow_consistency(rep, flow_u, p, g, "_u");
  rep.pass = structure_ok && rep.failures.empty();
  return rep;
}

ValidationReport validate_taylor(const ShearFlow& flow, const FlowValidationParams& p,
                                 const Grid& g, const std::vector<Real>& ts) {
  p.check();
  if (g.kind != DomainKind::Channel)
    throw ConfigError("taylor validation is defined on the channel");
  ValidationReport rep;
  rep.time_samples = static_cast<int>(ts.size());
  rep.space_points = g.n;

  Real sup_dty = 0, sup_dy = 0, sup_dyy = 0;
  Real pinch_margin = std::numeric_limits<Real>::infinity();
  int max_count = 0;
  for (Real t : ts) {
    std::vector<Real> roots;
    try {
      roots = critical_points(flow, t, g);
    } catch (const StructuralError& e) {
      rep.failures.push_back(e.what());
      rep.pass = false;
      return rep;
    }
    max_count = std::max<int>(max_count, static_cast<int>(roots.size()));
    for (Index j = 0; j < g.n; ++j) {
      const Real y = g.points[j];
      sup_dty = std::max(sup_dty, std::abs(flow.d_ty(t, y)));
      sup_dy = std::max(sup_dy, std::abs(flow.d_y(t, y)));
      sup_dyy = std::max(sup_dyy, std::abs(flow.d_yy(t, y)));
      for (Real root : roots) {
        const Real d = std::abs(y - root);
        if (d > p.taylor_radius || d <= 1e-8) continue;
        pinch_margin = std::min(pinch_margin,
                                p.taylor_shape * std::abs(flow.d_y(t, y)) -
                                    std::pow(d, static_cast<Real>(p.degeneracy_order)));
      }
    }
  }
  rep.measured["sup_dty"] = sup_dty;
  rep.measured["sup_dy"] = sup_dy;
  rep.measured["sup_dyy"] = sup_dyy;
  rep.measured["dty_bound"] = p.taylor_dty * p.nu;
  rep.measured["pinch_margin"] = pinch_margin;
  rep.measured["max_critical_points"] = max_count;
  rep.measured["taylor_dty"] = p.taylor_dty;

  if (sup_dty > p.taylor_dty * p.nu) rep.failures.push_back("|d_ty V| exceeds bound * nu");
  if (pinch_margin < 0)
    rep.failures.push_back("degeneracy pinch |y-y_i|^m <= C |dV/dy| violated near a critical point");
  record_flow_consistency(rep, flow, p, g, "");
  rep.pass = rep.failures.empty();
  return rep;
}

EquivalenceEstimate equivalence_constant(const ShearFlow& flow_v, const ShearFlow& flow_u,
                                         const Grid& g, const std::vector<Real>& ts,
                                         Real exclusion_radius) {
  EquivalenceEstimate est;
  Real lattice_max = 1.0;
  Real crit_max = 1.0;
  for (Real t : ts) {
    const auto roots = critical_points(flow_v, t, g);
    for (Index j = 0; j < g.n; ++j) {
      const Real y = g.points[j];
      if (!roots.empty() && nearest_root_distance(g, y, roots) <= exclusion_radius) continue;
      const Real dv = std::abs(flow_v.d_y(t, y));
      const Real du = std::abs(flow_u.d_y(t, y));
      if (du < 1e-14 || dv < 1e-14)
        throw StructuralError("slope vanishes away from critical points at t=" +
                              std::to_string(t) + ", y=" + std::to_string(y));
      lattice_max = std::max(lattice_max, std::max(dv / du, du / dv));
    }
    for (Real root : roots) {
      const Real cv = std::abs(flow_v.d_yy(t, root));
      const Real cu = std::abs(flow_u.d_yy(t, root));
      if (cv < 1e-14 || cu < 1e-14)
        throw StructuralError("degenerate critical point at t=" + std::to_string(t));
      crit_max = std::max(crit_max, std::max(cv / cu, cu / cv));
    }
  }
  est.lattice_max = lattice_max;
  est.critical_point_max = crit_max;
  est.c_star = std::max(lattice_max, crit_max);
  return est;
}

}  // namespace shearlab
