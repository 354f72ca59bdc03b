#pragma once

#include <functional>

#include "shearlab/grid.hpp"
#include "shearlab/shear.hpp"
#include "shearlab/types.hpp"

namespace shearlab {

/// One Fourier mode of the passive scalar: amplitude field, streamwise
/// wavenumber k != 0, diffusivity nu > 0, ellipticity flag sigma in {0,1}.
struct ModeState {
  Field field;
  Real k = 1.0;
  Real nu = 1e-3;
  int sigma = 0;
  Real t = 0.0;

  void check(const Grid& g) const;
};

enum class Scheme { StrangCN, LieCN };

struct SimConfig {
  Real dt = 1e-2;
  Real t_end = 1.0;
  Index sample_every = 1;
  Scheme scheme = Scheme::StrangCN;
};

/// Extra per-sample quantities supplied by an observer (the functionals
/// layer in practice); zeros when no observer is attached.
struct ObserverSample {
  Real cross = 0;
  Real functional = 0;
  Real certificate_margin = 0;
};

using Observer = std::function<ObserverSample(const Grid&, const ModeState&)>;

struct TrajectoryRecord {
  std::vector<Real> t, l2sq, h1sq, cross, functional, certificate_margin, boundary_mass;
  Real nu = 0, k = 0;
  int sigma = 0;
  Real initial_l2 = 0;

  size_t size() const { return t.size(); }
};

/// One Strang (or Lie) split step: exact unimodular phase rotation around a
/// Crank-Nicolson diffusion solve. Factorizations are cached, so reuse one
/// stepper for a whole trajectory.
class ModeStepper {
 public:
  ModeStepper(const Grid& g, const ShearFlow& flow, Real k, Real nu, int sigma,
              const SimConfig& cfg);
  void advance(Field& f, Real t) const;

  const Grid& grid() const { return *grid_; }
  Real dt() const { return dt_; }

 private:
  void diffuse(Field& f) const;
  void phase(Field& f, Real t_eval, Real dtau) const;

  const Grid* grid_;
  const ShearFlow* flow_;
  Real k_, nu_;
  int sigma_;
  Real dt_;
  Scheme scheme_;
  RealVec multipliers_;           // spectral CN symbol ratio (torus / line)
  RealVec thomas_denominator_;    // FD tridiagonal forward-elimination cache
  RealVec thomas_upper_;
  Real fd_off_ = 0, fd_sub_ = 0;
  Eigen::PartialPivLU<ComplexMat> dense_lu_;  // Chebyshev channel
  ComplexMat dense_rhs_;
};

/// Single exposed step of the scheme (builds a fresh stepper; use
/// ModeStepper directly in loops).
ModeState step(const Grid& g, const ModeState& state, const ShearFlow& flow,
               const SimConfig& cfg);

/// Exact unimodular phase rotation f <- f * exp(-i k V(t_eval, y) dtau).
void apply_phase(const Grid& g, const ShearFlow& flow, Real t_eval, Real k, Real dtau, Field& f);

/// |f| at the nodes adjacent to a Dirichlet boundary (0 on the torus);
/// the truncated-line mass monitor.
Real boundary_mass(const Grid& g, const Field& f);

TrajectoryRecord simulate(const Grid& g, const Field& initial, const ShearFlow& flow, Real k,
                          Real nu, int sigma, const SimConfig& cfg,
                          const Observer& observer = {});

/// Closed-form Couette (V = y) solution via quadrature of the continuous
/// Fourier integral; independent of the time stepper. Valid while the
/// sheared frequency content stays inside the grid's Nyquist band.
Field couette_exact(const Grid& g, const Field& initial, Real k, Real nu, int sigma, Real t);

/// L2 norm of the Couette solution straight from the frequency integral;
/// valid for arbitrary t.
Real couette_exact_norm(const Grid& g, const Field& initial, Real k, Real nu, int sigma, Real t);

/// Max relative defect of d/dt ||f||^2 = -2 nu sigma k^2 ||f||^2 - 2 nu ||df/dy||^2
/// over interior samples.
Real energy_residual(const TrajectoryRecord& rec);

}  // namespace shearlab
