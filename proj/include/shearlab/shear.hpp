#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "shearlab/grid.hpp"
#include "shearlab/types.hpp"

namespace shearlab {

/// Time-dependent shear profile V(t, y) with its analytic (or spline)
/// derivatives. Evaluators are pure functions of (t, y) and safe to call
/// concurrently.
struct ShearFlow {
  std::function<Real(Real, Real)> eval;  // V
  std::function<Real(Real, Real)> d_y;   // dV/dy
  std::function<Real(Real, Real)> d_yy;  // d2V/dy2
  std::function<Real(Real, Real)> d_ty;  // d2V/dtdy
  std::string name;
  std::map<std::string, Real> family_params;
  bool tabulated = false;
};

/// Families: couette, perturbed_monotone(a, omega), decaying_sine(nu),
/// static_sine, parabola. Tabulated flows are built with tabulated_flow().
ShearFlow builtin_flow(const std::string& family, const std::map<std::string, Real>& params = {});

/// Flow from a CSV table of rows t,y,v on a regular (t x y) lattice.
/// y-derivatives come from natural cubic splines per time slice, the mixed
/// derivative from differencing the spline slopes in t.
ShearFlow tabulated_flow(const std::string& csv_path);
ShearFlow tabulated_flow(const std::vector<Real>& ts, const std::vector<Real>& ys,
                         const std::vector<std::vector<Real>>& values, const std::string& name);

/// Max deviation between the flow's derivative closures and central
/// differences of eval over a (t, y) verification lattice.
Real flow_consistency_error(const ShearFlow& flow, const std::vector<Real>& ts, const RealVec& ys);

/// Roots of dV/dy(t, .) located by sign-change bisection to |dV/dy| <= 1e-10,
/// sorted ascending; on the torus, roots are identified modulo 2 pi.
std::vector<Real> critical_points(const ShearFlow& flow, Real t, const Grid& g,
                                  int max_roots = 64);

/// Critical-point locations per sampled time, matched across consecutive
/// times by nearest neighbour within `matching_radius`.
struct CriticalPointTrack {
  std::vector<Real> times;
  std::vector<std::vector<Real>> points;
  std::vector<int> count_per_time;
};

CriticalPointTrack track_critical_points(const ShearFlow& flow, const std::vector<Real>& ts,
                                         const Grid& g, Real matching_radius = 0.2);

/// Constants of the structural hypotheses the validators test against.
struct FlowValidationParams {
  Real horizon = 1.0;           // T
  Real nu = 1e-3;               // diffusivity entering the smallness bounds
  Real monotone_lower = 1.0;    // monotone slope floor
  Real shape_inner = 4.0;       // quadratic pinch near critical points, >= 1
  Real shape_outer = 4.0;       // slope band away from them, >= 1
  Real radius = 1.0;            // neighbourhood radius around critical points
  Real taylor_dty = 1.0;        // |d_ty V| <= taylor_dty * nu, >= 1
  Real taylor_shape = 1.0;      // |y - y_i|^m <= taylor_shape |dV/dy|, >= 1
  int degeneracy_order = 1;     // m, >= 1
  Real taylor_radius = 0.5;     // radius of the Taylor pinch
  int expected_critical_points = -1;  // -1: any fixed count
  int time_samples = 201;

  void check() const;  // throws ConfigError on an invalid combination
  std::vector<Real> sample_times() const;
};

struct ValidationReport {
  bool pass = false;
  std::vector<std::string> failures;
  std::map<std::string, Real> measured;
  int time_samples = 0;
  Index space_points = 0;

  Real at(const std::string& key) const;
};

ValidationReport validate_monotone(const ShearFlow& flow, const FlowValidationParams& p,
                                   const Grid& g, const std::vector<Real>& ts);

ValidationReport validate_nondegenerate(const ShearFlow& flow_v, const ShearFlow& flow_u,
                                        const FlowValidationParams& p, const Grid& g,
                                        const std::vector<Real>& ts);

ValidationReport validate_taylor(const ShearFlow& flow, const FlowValidationParams& p,
                                 const Grid& g, const std::vector<Real>& ts);

/// Measured comparability constant between dV/dy and dU/dy.
struct EquivalenceEstimate {
  Real c_star = 1.0;          // max(lattice_max, critical_point_max)
  Real lattice_max = 1.0;     // slope-ratio sup outside exclusion balls
  Real critical_point_max = 1.0;  // curvature-ratio sup at the critical points
};

EquivalenceEstimate equivalence_constant(const ShearFlow& flow_v, const ShearFlow& flow_u,
                                         const Grid& g, const std::vector<Real>& ts,
                                         Real exclusion_radius = 1e-3);

/// Distance between two torus points modulo 2 pi.
Real circle_distance(Real a, Real b);

}  // namespace shearlab
