#include "shearlab/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "shearlab/errors.hpp"

namespace shearlab {
namespace {

Real sign_of(Real k) { return k >= 0 ? 1.0 : -1.0; }

bool nondegenerate_beta_feasible(Real b, Real c_star, Real g_spec, Real dyy_sq) {
  const Real c32 = std::pow(c_star, 1.5);
  const Real c4 = std::pow(c_star, 4.0);
  const Real lhs1 = 4 * b * c_star + 83 * std::pow(b, 1.5) * c4 * dyy_sq;
  const Real lhs2 = std::sqrt(b) * (12 * c32 + 83 * c4 * g_spec * dyy_sq);
  return lhs1 <= 5.0 / 8.0 && lhs2 <= 1.0 / (8.0 * c_star);
}

}  // namespace

Weights weights(Real t, Real nu, Real k) {
  if (nu <= 0 || k == 0 || t < 0) throw ConfigError("weights: need nu > 0, k != 0, t >= 0");
  const Real ak = std::abs(k);
  Weights w;
  w.eps = nu / ak;
  w.psi = std::min(std::pow(nu, 1.0 / 3.0) * std::pow(ak, 2.0 / 3.0) * t, 1.0);
  w.phi = std::min(std::sqrt(nu) * std::sqrt(ak) * t, 1.0);
  w.zeta = std::min(ak * ak * t / nu, 1.0);
  return w;
}

Real saturation_time(Regime regime, Real nu, Real k) {
  const Real ak = std::abs(k);
  switch (regime) {
    case Regime::Monotone:
      return std::pow(nu, -1.0 / 3.0) * std::pow(ak, -2.0 / 3.0);
    case Regime::Nondegenerate:
      return 1.0 / std::sqrt(nu * ak);
    case Regime::Taylor:
      return nu / (ak * ak);
  }
  throw ConfigError("unknown regime");
}

Real certificate_rate(Regime regime, Real nu, Real k) {
  const Real ak = std::abs(k);
  switch (regime) {
    case Regime::Monotone:
      return std::pow(nu, 1.0 / 3.0) * std::pow(ak, 2.0 / 3.0);
    case Regime::Nondegenerate:
      return std::sqrt(nu * ak);
    case Regime::Taylor:
      return ak * ak / nu;
  }
  throw ConfigError("unknown regime");
}

FunctionalParams params_monotone(const ValidationReport& validation) {
  if (!validation.pass)
    throw ConfigError("params_monotone: monotone validation did not pass");
  const Real sup_dy = validation.at("sup_dy");
  const Real c = validation.at("c_lower");
  FunctionalParams p;
  p.regime = Regime::Monotone;
  p.alpha = p.beta = 1.0 / (2.0 * (1.0 + sup_dy));
  p.delta = 1.0 / (6.0 * (1.0 + c) * (1.0 + sup_dy));
  return p;
}

FunctionalParams params_nondegenerate(Real c_star, Real spectral_constant, Real sup_dyy_u) {
  if (c_star < 1 || spectral_constant < 1 || sup_dyy_u < 0)
    throw ConfigError("params_nondegenerate: need C* >= 1, spectral constant >= 1");
  const Real dyy_sq = std::max(Real(1), sup_dyy_u * sup_dyy_u);
  const Real floor = 1e-12;
  if (!nondegenerate_beta_feasible(floor, c_star, spectral_constant, dyy_sq))
    throw StructuralError("params_nondegenerate: constants too large, no feasible beta > 1e-12");
  Real lo = floor, hi = 1.0;
  if (nondegenerate_beta_feasible(hi, c_star, spectral_constant, dyy_sq)) {
    lo = hi;
  } else {
    for (int it = 0; it < 200; ++it) {
      const Real mid = 0.5 * (lo + hi);
      (nondegenerate_beta_feasible(mid, c_star, spectral_constant, dyy_sq) ? lo : hi) = mid;
    }
  }
  FunctionalParams p;
  p.regime = Regime::Nondegenerate;
  p.beta = lo;
  p.alpha = std::sqrt(lo) / (4.0 * std::pow(c_star, 1.5));
  p.gamma = 4.0 * std::pow(lo, 1.5) * std::pow(c_star, 1.5);
  p.delta = lo / (96.0 * std::max(spectral_constant, c_star));
  p.c_star = c_star;
  p.c_spec = spectral_constant;
  return p;
}

FunctionalParams params_taylor(const ValidationReport& validation, Real spectral_constant,
                               Real c0) {
  if (!validation.pass) throw ConfigError("params_taylor: taylor validation did not pass");
  if (spectral_constant < 1) throw ConfigError("params_taylor: spectral constant missing or < 1");
  if (c0 < 1) throw ConfigError("params_taylor: C0 must be >= 1");
  const Real g2 = validation.at("taylor_dty");
  const Real sup_dy = validation.at("sup_dy");
  const Real sup_dyy = validation.at("sup_dyy");
  FunctionalParams p;
  p.regime = Regime::Taylor;
  p.alpha = p.beta = 1.0 / (16.0 * c0 * (1.0 + g2 + sup_dy * sup_dy + sup_dyy * sup_dyy));
  p.delta = p.beta / (6.0 * spectral_constant);
  p.c_spec = spectral_constant;
  p.c0 = c0;
  return p;
}

FunctionalSample eval_functional(const Grid& g, const Field& f, Real t, Real k, Real nu,
                                 const ShearFlow& flow_v, const ShearFlow* flow_u,
                                 const FunctionalParams& params) {
  FunctionalSample s;
  s.w = weights(t, nu, k);
  const Field df = derivative(g, f, 1);
  s.l2sq = inner_product(g, f, f).real();
  s.h1sq = inner_product(g, df, df).real();
  const Real sgn = sign_of(k);

  switch (params.regime) {
    case Regime::Monotone: {
      // Re< i sign(k) f, df > = -sign(k) Im< f, df >
      s.cross = -sgn * inner_product(g, f, df).imag();
      const Real grad_term =
          params.alpha * s.w.psi * std::pow(s.w.eps, 2.0 / 3.0) * s.h1sq;
      const Real cross_term =
          params.beta * s.w.psi * s.w.psi * std::pow(s.w.eps, 1.0 / 3.0) * s.cross;
      s.value = s.l2sq + (s.w.psi > 0 ? grad_term + cross_term : 0.0);
      break;
    }
    case Regime::Nondegenerate: {
      if (!flow_u) throw ConfigError("eval_functional: nondegenerate regime needs a reference flow");
      Field uf(g.n);
      for (Index j = 0; j < g.n; ++j) uf[j] = flow_u->d_y(t, g.points[j]) * f[j];
      s.cross = -sgn * inner_product(g, uf, df).imag();
      s.u_weighted = inner_product(g, uf, uf).real();
      const Real se = std::sqrt(s.w.eps);
      const Real phi = s.w.phi;
      const Real terms = params.alpha * phi * se * s.h1sq +
                         params.beta * phi * phi * s.cross +
                         params.gamma * phi * phi * phi / se * s.u_weighted;
      s.value = s.l2sq + (phi > 0 ? terms : 0.0);
      break;
    }
    case Regime::Taylor: {
      Field vf(g.n);
      for (Index j = 0; j < g.n; ++j) vf[j] = flow_v.d_y(t, g.points[j]) * f[j];
      s.cross = -sgn * inner_product(g, vf, df).imag();
      const Real zeta = s.w.zeta;
      s.value = s.l2sq +
                (zeta > 0 ? params.alpha * zeta * s.h1sq + params.beta * zeta * s.cross : 0.0);
      break;
    }
  }
  return s;
}

EquivalenceMargin check_equivalence(const FunctionalSample& s, const FunctionalParams& params) {
  EquivalenceMargin m;
  switch (params.regime) {
    case Regime::Monotone: {
      const Real core =
          s.l2sq + params.alpha * std::pow(s.w.eps, 2.0 / 3.0) * s.w.psi * s.h1sq;
      m.lower_slack = s.value - 0.5 * core;
      m.upper_slack = 1.5 * core - s.value;
      break;
    }
    case Regime::Nondegenerate: {
      const Real se = std::sqrt(s.w.eps);
      const Real core = params.alpha * s.w.phi * se * s.h1sq +
                        params.gamma * std::pow(s.w.phi, 3) / se * s.u_weighted;
      m.lower_slack = s.value - (s.l2sq + 0.5 * core);
      m.upper_slack = (s.l2sq + 1.5 * core) - s.value;
      break;
    }
    case Regime::Taylor: {
      const Real core = params.alpha * s.w.zeta * s.h1sq;
      m.lower_slack = s.value - 0.5 * (s.l2sq + core);
      m.upper_slack = 1.5 * (s.l2sq + core) - s.value;
      break;
    }
  }
  return m;
}

CertificateCheck check_certificate(const TrajectoryRecord& rec, const FunctionalParams& params,
                                   Real tol) {
  if (rec.size() == 0) throw ConfigError("check_certificate: empty record");
  CertificateCheck out;
  const Real f0 = rec.functional.front();
  if (f0 <= 0) {
    // Zero data: every sample must stay zero for the certificate to hold.
    Real worst = 0;
    for (Real v : rec.functional) worst = std::max(worst, v);
    out.margin = 0;
    out.best_prefactor = 0;
    out.pass = worst <= 0;
    return out;
  }
  const Real rate = certificate_rate(params.regime, rec.nu, rec.k);
  for (size_t i = 0; i < rec.size(); ++i) {
    const Real margin =
        rec.functional[i] * std::exp(params.delta * rate * rec.t[i]) / (kE * f0);
    out.margin = std::max(out.margin, margin);
    out.best_prefactor = std::max(out.best_prefactor, rec.functional[i] / f0);
  }
  out.pass = out.margin <= 1 + tol;
  return out;
}

Real gronwall_diagnostic(const TrajectoryRecord& rec, const FunctionalParams& params) {
  if (params.delta <= 0) throw ConfigError("gronwall: certificate rate constant missing");
  const Real rate = certificate_rate(params.regime, rec.nu, rec.k);
  const Real t_sat = saturation_time(params.regime, rec.nu, rec.k);
  std::vector<size_t> idx;
  for (size_t i = 0; i < rec.size(); ++i)
    if (rec.t[i] >= t_sat) idx.push_back(i);
  if (idx.size() < 3) throw ConfigError("gronwall: need at least 3 post-saturation samples");
  Real worst = -std::numeric_limits<Real>::infinity();
  for (size_t j = 1; j + 1 < idx.size(); ++j) {
    const size_t lo = idx[j - 1], mid = idx[j], hi = idx[j + 1];
    const Real span = rec.t[hi] - rec.t[lo];
    if (span * params.delta * rate > 2.0 / 3.0)
      throw ConfigError("gronwall: sample cadence coarser than 3 samples per e-folding");
    const Real dfdt = (rec.functional[hi] - rec.functional[lo]) / span;
    const Real bound = params.delta * rate * rec.functional[mid];
    const Real residual = dfdt + bound;
    const Real scale = std::max({std::abs(dfdt), bound, 1e-300});
    worst = std::max(worst, residual / scale);
  }
  return worst;
}

Observer functional_observer(const ShearFlow& flow_v, const ShearFlow* flow_u,
                             const FunctionalParams& params) {
  auto f0 = std::make_shared<Real>(-1.0);
  const ShearFlow* v = &flow_v;
  return [v, flow_u, params, f0](const Grid& g, const ModeState& state) {
    const FunctionalSample s =
        eval_functional(g, state.field, state.t, state.k, state.nu, *v, flow_u, params);
    if (*f0 < 0) *f0 = s.value;
    ObserverSample obs;
    obs.cross = s.cross;
    obs.functional = s.value;
    if (*f0 > 0) {
      const Real rate = certificate_rate(params.regime, state.nu, state.k);
      obs.certificate_margin =
          s.value * std::exp(params.delta * rate * state.t) / (kE * (*f0));
    }
    return obs;
  };
}

}  // namespace shearlab
