#include "shearlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "shearlab/errors.hpp"

namespace shearlab {
namespace {

struct LineFit {
  Real slope = 0, intercept = 0, r_squared = 1, residual_max = 0;
};

LineFit least_squares(const std::vector<Real>& x, const std::vector<Real>& y) {
  const size_t n = x.size();
  Real sx = 0, sy = 0;
  for (size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const Real mx = sx / n, my = sy / n;
  Real sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  Real ss_res = 0, ss_tot = 0;
  for (size_t i = 0; i < n; ++i) {
    const Real r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += r * r;
    ss_tot += (y[i] - my) * (y[i] - my);
    fit.residual_max = std::max(fit.residual_max, std::abs(r));
  }
  fit.r_squared = ss_tot > 0 ? std::max(Real(0), 1 - ss_res / ss_tot) : 1;
  return fit;
}

}  // namespace

RateFit fit_decay_rate(const TrajectoryRecord& rec, Real saturation, WindowPolicy policy) {
  if (rec.size() == 0) throw ConfigError("rate fit: empty record");
  const Real norm0 = std::sqrt(std::max(rec.l2sq.front(), Real(0)));
  const Real floor = std::max(policy.floor_abs, policy.floor_rel * norm0);
  const Real t_lo = policy.t_lo >= 0 ? policy.t_lo : saturation;
  Real t_floor = rec.t.back();
  for (size_t i = 0; i < rec.size(); ++i) {
    if (std::sqrt(std::max(rec.l2sq[i], Real(0))) <= floor) {
      t_floor = rec.t[i];
      break;
    }
  }

  auto collect = [&](Real hi, std::vector<Real>& ts, std::vector<Real>& logs) {
    ts.clear();
    logs.clear();
    for (size_t i = 0; i < rec.size(); ++i) {
      if (rec.t[i] < t_lo || rec.t[i] > hi) continue;
      const Real norm = std::sqrt(std::max(rec.l2sq[i], Real(0)));
      if (norm <= 0) continue;
      ts.push_back(rec.t[i]);
      logs.push_back(std::log(norm));
    }
  };

  Real t_hi;
  std::vector<Real> ts, logs;
  if (policy.t_hi >= 0) {
    t_hi = policy.t_hi;
    collect(t_hi, ts, logs);
  } else {
    // Prefer a window self-similar in the saturation scale; widen to the
    // decay floor only when it holds fewer than the required 2 e-foldings.
    t_hi = t_floor;
    if (saturation > 0) {
      const Real capped = std::min(t_floor, policy.relative_cap * saturation);
      collect(capped, ts, logs);
      if (ts.size() >= 10 && logs.front() - logs.back() >= 2) {
        t_hi = capped;
      } else {
        collect(t_floor, ts, logs);
      }
    } else {
      collect(t_hi, ts, logs);
    }
  }

  if (ts.size() < 10)
    throw InsufficientDecayError("rate fit: fewer than 10 samples in the window [" +
                                 std::to_string(t_lo) + ", " + std::to_string(t_hi) + "]");
  const Real efolds = logs.front() - logs.back();
  if (efolds < 2)
    throw InsufficientDecayError("rate fit: only " + std::to_string(efolds) +
                                 " e-foldings of decay inside the window");

  const LineFit fit = least_squares(ts, logs);
  RateFit out;
  out.delta_hat = -fit.slope;
  out.t_lo = ts.front();
  out.t_hi = ts.back();
  out.r_squared = fit.r_squared;
  out.residual_max = fit.residual_max;
  out.n_points = static_cast<int>(ts.size());
  return out;
}

ScalingFit scaling_exponent(const std::vector<std::pair<Real, Real>>& nu_rate) {
  if (nu_rate.size() < 4) throw ConfigError("scaling fit: need at least 4 sweep points");
  Real nu_min = std::numeric_limits<Real>::infinity(), nu_max = 0;
  std::vector<Real> lx, ly;
  for (const auto& [nu, rate] : nu_rate) {
    if (nu <= 0 || rate <= 0) throw NumericalError("scaling fit: nonpositive rate or nu");
    nu_min = std::min(nu_min, nu);
    nu_max = std::max(nu_max, nu);
    lx.push_back(std::log(nu));
    ly.push_back(std::log(rate));
  }
  if (nu_max / nu_min < 99.999) throw ConfigError("scaling fit: sweep must span >= 2 decades");
  const LineFit fit = least_squares(lx, ly);
  ScalingFit out;
  out.p_hat = fit.slope;
  for (const auto& [nu, rate] : nu_rate) out.prefactor.push_back(rate / std::pow(nu, out.p_hat));
  return out;
}

namespace {

// Weighted self-adjoint form of a * (first-derivative energy) + potential on
// the grid's own inner product; Dirichlet grids restrict to interior nodes.
RealMat quadratic_form_matrix(const Grid& g, Real derivative_coeff, const RealVec& potential) {
  const RealMat d = dense_derivative_matrix(g);
  const Index n = g.n;
  const bool dir = g.boundary == BoundaryKind::Dirichlet;
  const Index lo = dir ? 1 : 0;
  const Index m = dir ? n - 2 : n;

  RealMat d_cols = d.block(0, lo, n, m);  // boundary values pinned to zero
  RealMat a = derivative_coeff * d_cols.transpose() * g.quadrature_weights.asDiagonal() * d_cols;
  for (Index i = 0; i < m; ++i)
    a(i, i) += g.quadrature_weights[lo + i] * potential[lo + i];
  // Symmetrize against roundoff and fold in the mass weights.
  RealVec inv_sqrt_w(m);
  for (Index i = 0; i < m; ++i) inv_sqrt_w[i] = 1.0 / std::sqrt(g.quadrature_weights[lo + i]);
  RealMat s = inv_sqrt_w.asDiagonal() * a * inv_sqrt_w.asDiagonal();
  return 0.5 * (s + s.transpose());
}

Real lambda_min(const RealMat& s) {
  Eigen::SelfAdjointEigenSolver<RealMat> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// Smallest c in [1e-6, 1e6] with fn(c) >= target; fn nondecreasing. Returns
// the upper end of a bracket with relative width 1e-3.
Real bisect_constant(const std::function<Real(Real)>& fn, Real target) {
  Real lo = 1e-6, hi = 1e6;
  if (fn(hi) < target)
    throw StructuralError("spectral constant: inequality unsatisfiable even at C = 1e6");
  if (fn(lo) >= target) return lo;
  while (hi / lo > 1.001) {
    const Real mid = std::sqrt(lo * hi);
    (fn(mid) >= target ? hi : lo) = mid;
  }
  return hi;
}

Real torus_raw_constant(const ShearFlow& flow_u, Real t, Real eps, const Grid& g) {
  RealVec potential(g.n);
  for (Index j = 0; j < g.n; ++j) {
    const Real du = flow_u.d_y(t, g.points[j]);
    potential[j] = du * du;
  }
  const RealMat base = quadratic_form_matrix(g, eps, RealVec::Zero(g.n));
  const RealMat pot = quadratic_form_matrix(g, 0.0, potential);
  const Real target = std::sqrt(eps);
  return bisect_constant([&](Real c) { return lambda_min(base + c * pot); }, target);
}

Real channel_raw_constant(const ShearFlow& flow_v, Real t, const Grid& g) {
  RealVec potential(g.n);
  for (Index j = 0; j < g.n; ++j) {
    const Real dv = flow_v.d_y(t, g.points[j]);
    potential[j] = dv * dv;
  }
  const Real lambda1 = lambda_min(quadratic_form_matrix(g, 1.0, potential));
  if (lambda1 <= 0)
    throw StructuralError("spectral constant: discrete operator lost positivity");
  // The operator scales linearly in C, so lambda_min(C) = C * lambda1.
  return bisect_constant([&](Real c) { return c * lambda1; }, 1.0);
}

Grid half_resolution(const Grid& g) {
  const Index n = std::max<Index>(16, g.n / 2);
  if (g.kind == DomainKind::TruncatedLine)
    return build_grid(g.kind, n, g.half_width, g.scheme);
  return build_grid(g.kind, n, std::nullopt, g.scheme);
}

}  // namespace

SpectralEstimate spectral_constant_torus(const ShearFlow& flow_u, Real t, Real eps,
                                         const Grid& g) {
  if (g.kind != DomainKind::Torus) throw ConfigError("spectral (torus form): torus grid required");
  if (eps <= 0) throw ConfigError("spectral: eps must be positive");
  SpectralEstimate est;
  est.eps = eps;
  est.grid_n = g.n;
  est.raw = torus_raw_constant(flow_u, t, eps, g);
  est.constant = std::max(est.raw, Real(1));
  try {
    const Real coarse = std::max(torus_raw_constant(flow_u, t, eps, half_resolution(g)), Real(1));
    est.converged = std::abs(est.constant - coarse) < 0.01 * est.constant;
  } catch (const StructuralError&) {
    est.converged = false;  // half resolution cannot even bracket the constant
  }
  return est;
}

SpectralEstimate spectral_constant_channel(const ShearFlow& flow_v, Real t, const Grid& g) {
  if (g.kind != DomainKind::Channel)
    throw ConfigError("spectral (channel form): channel grid required");
  SpectralEstimate est;
  est.eps = 0;
  est.grid_n = g.n;
  est.raw = channel_raw_constant(flow_v, t, g);
  est.constant = std::max(est.raw, Real(1));
  try {
    const Real coarse = std::max(channel_raw_constant(flow_v, t, half_resolution(g)), Real(1));
    est.converged = std::abs(est.constant - coarse) < 0.01 * est.constant;
  } catch (const StructuralError&) {
    est.converged = false;
  }
  return est;
}

Real poincare_constant(const Grid& g) {
  if (g.kind != DomainKind::Channel) throw ConfigError("poincare: channel grid required");
  const Index m = g.n - 2;
  Real lambda1 = 0;
  if (g.scheme == ChannelScheme::FiniteDifference) {
    const Real h = g.spacing();
    RealMat a = RealMat::Zero(m, m);
    for (Index i = 0; i < m; ++i) {
      a(i, i) = 2.0 / (h * h);
      if (i > 0) a(i, i - 1) = -1.0 / (h * h);
      if (i + 1 < m) a(i, i + 1) = -1.0 / (h * h);
    }
    lambda1 = lambda_min(a);
  } else {
    const RealMat d2 = (g.cheb_d1 * g.cheb_d1).block(1, 1, m, m);
    Eigen::EigenSolver<RealMat> es(-d2);
    lambda1 = std::numeric_limits<Real>::infinity();
    for (Index i = 0; i < m; ++i) {
      const Complex ev = es.eigenvalues()(i);
      if (std::abs(ev.imag()) > 1e-6 * std::max(Real(1), std::abs(ev)) || ev.real() <= 0)
        continue;
      lambda1 = std::min(lambda1, ev.real());
    }
  }
  if (!(lambda1 > 0)) throw NumericalError("poincare: no positive ground eigenvalue found");
  return 1.0 / std::sqrt(lambda1);
}

namespace {

class GaussianStream {
 public:
  explicit GaussianStream(unsigned long long seed) : engine_(seed) {}
  Real operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    Real u1 = 0;
    while (u1 <= 0) u1 = uniform();
    const Real u2 = uniform();
    const Real r = std::sqrt(-2 * std::log(u1));
    spare_ = r * std::sin(2 * kPi * u2);
    have_spare_ = true;
    return r * std::cos(2 * kPi * u2);
  }

 private:
  Real uniform() { return static_cast<Real>(engine_() >> 11) * 0x1.0p-53; }
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  Real spare_ = 0;
};

}  // namespace

Field random_field(const Grid& g, unsigned long long seed) {
  GaussianStream gauss(seed);
  const Index modes = std::min<Index>(g.n / 4, 32);
  Field f = Field::Zero(g.n);
  if (g.kind == DomainKind::Torus) {
    for (Index m = -modes; m <= modes; ++m) {
      const Complex c(gauss(), gauss());
      const Real scale = 1.0 / (1.0 + std::abs(static_cast<Real>(m)));
      for (Index j = 0; j < g.n; ++j) {
        const Real theta = static_cast<Real>(m) * g.points[j];
        f[j] += scale * c * Complex(std::cos(theta), std::sin(theta));
      }
    }
  } else {
    const Real length = g.length();
    for (Index m = 1; m <= modes; ++m) {
      const Complex c(gauss(), gauss());
      const Real scale = 1.0 / (1.0 + static_cast<Real>(m));
      for (Index j = 0; j < g.n; ++j) {
        const Real s = std::sin(static_cast<Real>(m) * kPi * (g.points[j] + g.half_width) / length);
        f[j] += scale * c * s;
      }
    }
    f[0] = Complex(0, 0);
    f[g.n - 1] = Complex(0, 0);
  }
  return f;
}

int spectral_violations(const ShearFlow& flow, Real t, Real eps, const Grid& g,
                        const SpectralEstimate& est, int n_fields, unsigned long long seed) {
  RealVec slope(g.n);
  for (Index j = 0; j < g.n; ++j) slope[j] = flow.d_y(t, g.points[j]);
  int violations = 0;
  for (int i = 0; i < n_fields; ++i) {
    const Field f = random_field(g, seed + static_cast<unsigned long long>(i));
    const Real l2sq = inner_product(g, f, f).real();
    const Real h1sq = std::pow(h1_seminorm(g, f), 2);
    Field wf(g.n);
    for (Index j = 0; j < g.n; ++j) wf[j] = slope[j] * f[j];
    const Real wsq = inner_product(g, wf, wf).real();
    Real lhs, rhs;
    if (eps > 0) {
      lhs = std::sqrt(eps) * l2sq;
      rhs = eps * h1sq + est.constant * wsq;
    } else {
      lhs = l2sq;
      rhs = est.constant * (h1sq + wsq);
    }
    if (lhs > rhs * (1 + 1e-12)) ++violations;
  }
  return violations;
}

}  // namespace shearlab
