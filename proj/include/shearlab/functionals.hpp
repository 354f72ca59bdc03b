#pragma once

#include <optional>

#include "shearlab/grid.hpp"
#include "shearlab/shear.hpp"
#include "shearlab/solver.hpp"
#include "shearlab/types.hpp"

namespace shearlab {

enum class Regime { Monotone, Nondegenerate, Taylor };

/// epsilon = nu / |k| and the three saturating time weights. psi ramps on
/// the nu^(-1/3) enhanced-dissipation scale, phi on nu^(-1/2), zeta on the
/// Taylor scale nu / k^2; all are 0 at t = 0 and exactly 1 past saturation.
struct Weights {
  Real eps = 0;
  Real psi = 0;
  Real phi = 0;
  Real zeta = 0;
};

Weights weights(Real t, Real nu, Real k);

/// Saturation time of the regime's weight (the initial time layer's end).
Real saturation_time(Regime regime, Real nu, Real k);

/// Exponential rate rho(t)/t the certificate is tested against:
/// nu^(1/3)|k|^(2/3), nu^(1/2)|k|^(1/2), or |k|^2/nu.
Real certificate_rate(Regime regime, Real nu, Real k);

struct FunctionalParams {
  Regime regime = Regime::Monotone;
  Real alpha = 0;
  Real beta = 0;
  Real gamma = 0;  // nonzero only in the nondegenerate regime
  Real delta = 0;  // certified decay-rate constant
  Real c_star = 1;
  Real c_spec = 1;
  Real c0 = 4;  // Taylor universal constant, configurable
};

/// alpha = beta = 1 / (2 (1 + sup|dV/dy|)), delta = 1 / (6 (1+c)(1+sup|dV/dy|)),
/// from a passed monotone validation report.
FunctionalParams params_monotone(const ValidationReport& validation);

/// Largest beta <= 1 satisfying, at half margin, the two bracket-positivity
/// constraints behind the nondegenerate energy estimate:
///   4 b C* + 83 b^{3/2} C*^4 max(1, sup|dyyU|^2)            <= 5/8
///   12 b^{1/2} C*^{3/2} + 83 b^{1/2} C*^4 G max(1, sup|dyyU|^2) <= 1/(8 C*)
/// then alpha = b^{1/2}/(4 C*^{3/2}), gamma = 4 b^{3/2} C*^{3/2} (so b^2 = alpha gamma),
/// delta = b / (96 max(G, C*)). Throws StructuralError when no b > 1e-12 fits.
FunctionalParams params_nondegenerate(Real c_star, Real spectral_constant, Real sup_dyy_u);

/// alpha = beta = 1 / (16 C0 (1 + G2 + sup|dV/dy|^2 + sup|dyyV|^2)),
/// delta = beta / (6 Cspec), from a passed Taylor validation report.
FunctionalParams params_taylor(const ValidationReport& validation, Real spectral_constant,
                               Real c0 = 4);

/// One evaluation of the regime's hypocoercivity functional with every term
/// stored separately.
struct FunctionalSample {
  Real l2sq = 0;
  Real h1sq = 0;
  Real cross = 0;        // Re< i sign(k) (weight) f, df/dy >
  Real u_weighted = 0;   // ||dU/dy f||^2, nondegenerate only
  Real value = 0;
  Weights w;
};

FunctionalSample eval_functional(const Grid& g, const Field& f, Real t, Real k, Real nu,
                                 const ShearFlow& flow_v, const ShearFlow* flow_u,
                                 const FunctionalParams& params);

/// Two-sided norm-equivalence slack for the regime's sandwich; both slacks
/// are >= 0 when the parameter constraint holds.
struct EquivalenceMargin {
  Real lower_slack = 0;
  Real upper_slack = 0;
  Real min_slack() const { return std::min(lower_slack, upper_slack); }
};

EquivalenceMargin check_equivalence(const FunctionalSample& s, const FunctionalParams& params);

/// max over samples of F(t) exp(delta rho(t)) / (e F(0)); the certificate
/// holds when this is <= 1 + tol. Also reports the best growth prefactor
/// max F(t)/F(0).
struct CertificateCheck {
  Real margin = 0;
  Real best_prefactor = 0;
  bool pass = false;
};

CertificateCheck check_certificate(const TrajectoryRecord& rec, const FunctionalParams& params,
                                   Real tol = 1e-6);

/// Post-saturation residual of dF/dt <= -delta rho' F, normalized by
/// max(|dF/dt|, delta rho' F); nonpositive when the differential
/// inequality holds sample-to-sample.
Real gronwall_diagnostic(const TrajectoryRecord& rec, const FunctionalParams& params);

/// Observer wiring eval_functional + the running certificate margin into
/// solver::simulate.
Observer functional_observer(const ShearFlow& flow_v, const ShearFlow* flow_u,
                             const FunctionalParams& params);

}  // namespace shearlab
