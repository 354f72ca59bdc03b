#pragma once

#include <utility>
#include <vector>

#include "shearlab/functionals.hpp"
#include "shearlab/grid.hpp"
#include "shearlab/shear.hpp"
#include "shearlab/solver.hpp"
#include "shearlab/types.hpp"

namespace shearlab {

/// Least-squares exponential rate of ||f(t)|| over a window.
struct RateFit {
  Real delta_hat = 0;
  Real t_lo = 0, t_hi = 0;
  Real r_squared = 0;
  Real residual_max = 0;
  int n_points = 0;
};

/// Window defaults: [saturation time, min(t_end, relative_cap * saturation,
/// first time ||f|| <= max(floor_abs, floor_rel * ||f0||))]. Explicit t_lo /
/// t_hi override the policy.
struct WindowPolicy {
  Real t_lo = -1;
  Real t_hi = -1;
  Real floor_abs = 1e-10;
  Real floor_rel = 1e-6;
  Real relative_cap = 8.0;
};

RateFit fit_decay_rate(const TrajectoryRecord& rec, Real saturation, WindowPolicy policy = {});

/// Slope of log(rate) against log(nu) plus the per-point prefactors
/// rate / nu^p_hat. Needs >= 4 points spanning >= 2 decades.
struct ScalingFit {
  Real p_hat = 0;
  std::vector<Real> prefactor;
};

ScalingFit scaling_exponent(const std::vector<std::pair<Real, Real>>& nu_rate);

struct SpectralEstimate {
  Real constant = 1;   // max(raw, 1)
  Real raw = 0;        // bisection output before the >= 1 clamp
  Real eps = 0;        // 0 for the channel variant
  Index grid_n = 0;
  bool converged = false;  // halving n moves the constant by < 1%
};

/// Smallest C with lambda_min(-eps d_yy + C |dU/dy(t,.)|^2) >= sqrt(eps) on the
/// torus, by bisection over [1e-6, 1e6] on the dense self-adjoint discretization.
SpectralEstimate spectral_constant_torus(const ShearFlow& flow_u, Real t, Real eps, const Grid& g);

/// Smallest C with lambda_min(C(-d_yy + |dV/dy(t,.)|^2)) >= 1 on the Dirichlet
/// channel.
SpectralEstimate spectral_constant_channel(const ShearFlow& flow_v, Real t, const Grid& g);

/// 1 / sqrt(lambda_min(-d_yy)) on the Dirichlet channel; tends to 2/pi.
Real poincare_constant(const Grid& g);

/// Deterministic pseudo-random band-limited field: decaying Fourier modes on
/// the torus, a Dirichlet sine series otherwise.
Field random_field(const Grid& g, unsigned long long seed);

/// Number of seeded random fields violating the spectral inequality with the
/// returned constant (torus form when eps > 0, channel form when eps == 0).
int spectral_violations(const ShearFlow& flow, Real t, Real eps, const Grid& g,
                        const SpectralEstimate& est, int n_fields, unsigned long long seed);

}  // namespace shearlab
