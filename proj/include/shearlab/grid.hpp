#pragma once

#include <optional>

#include "shearlab/types.hpp"

namespace shearlab {

enum class DomainKind { Torus, TruncatedLine, Channel };
enum class BoundaryKind { Periodic, Dirichlet };
enum class ChannelScheme { FiniteDifference, Chebyshev };

/// One-dimensional collocation mesh with its quadrature rule.
///
/// Immutable after construction; safe to share across threads. Torus is
/// fixed to [-pi, pi), Channel to [-1, 1]; TruncatedLine covers [-L, L]
/// with homogeneous Dirichlet ends. Differentiation is spectral on the
/// Torus (DFT) and TruncatedLine (sine series via odd extension), and
/// either second-order central differences or Chebyshev collocation on
/// the Channel.
struct Grid {
  DomainKind kind = DomainKind::Torus;
  BoundaryKind boundary = BoundaryKind::Periodic;
  Index n = 0;
  Real half_width = kPi;  // L: pi (Torus), 1 (Channel), user L (TruncatedLine)
  RealVec points;
  RealVec quadrature_weights;
  ChannelScheme scheme = ChannelScheme::FiniteDifference;
  RealMat cheb_d1;  // dense collocation derivative, Chebyshev grids only

  Real length() const { return kind == DomainKind::Torus ? 2 * kPi : 2 * half_width; }
  Real spacing() const { return points.size() > 1 ? points[1] - points[0] : Real(0); }
};

Grid build_grid(DomainKind kind, Index n, std::optional<Real> half_width = std::nullopt,
                ChannelScheme scheme = ChannelScheme::FiniteDifference);

/// Spectral/FD derivative of order 1 or 2, consistent with the grid's
/// boundary behaviour.
Field derivative(const Grid& g, const Field& f, int order);

/// Quadrature approximation of \int f conj(g) dy. Conjugate-symmetric exactly.
Complex inner_product(const Grid& g, const Field& f, const Field& h);

Real l2_norm(const Grid& g, const Field& f);
Real h1_seminorm(const Grid& g, const Field& f);

/// Throws ConfigError unless f has exactly g.n entries.
void require_conforming(const Grid& g, const Field& f);

/// Dense first-derivative matrix realizing the same operator as
/// derivative(g, ., 1); used to assemble self-adjoint quadratic forms.
RealMat dense_derivative_matrix(const Grid& g);

}  // namespace shearlab
