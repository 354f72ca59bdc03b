#include "shearlab/grid.hpp"

#include <cmath>

#include <unsupported/Eigen/FFT>

#include "shearlab/errors.hpp"

namespace shearlab {
namespace {

Eigen::FFT<Real>& fft_engine() {
  thread_local Eigen::FFT<Real> fft;
  return fft;
}

ComplexVec fft_fwd(const ComplexVec& v) {
  ComplexVec out(v.size());
  fft_engine().fwd(out, v);
  return out;
}

ComplexVec fft_inv(const ComplexVec& v) {
  ComplexVec out(v.size());
  fft_engine().inv(out, v);
  return out;
}

// Signed DFT frequency for bin m of an n-point transform over period `period`.
Real dft_frequency(Index m, Index n, Real period) {
  const Index signed_m = (m <= n / 2) ? m : m - n;
  return 2 * kPi * static_cast<Real>(signed_m) / period;
}

ComplexVec torus_derivative(const Grid& g, const Field& f, int order) {
  ComplexVec coeffs = fft_fwd(f);
  const Index n = g.n;
  for (Index m = 0; m < n; ++m) {
    const Real eta = dft_frequency(m, n, 2 * kPi);
    if (order == 1) {
      // Nyquist mode has no well-defined odd derivative; drop it.
      coeffs[m] *= (2 * m == n) ? Complex(0, 0) : Complex(0, eta);
    } else {
      coeffs[m] *= -eta * eta;
    }
  }
  return fft_inv(coeffs);
}

// Odd extension of a Dirichlet field over [-L, L] to a 2K-periodic signal,
// K = n - 1. Sine modes sin(m pi (y+L) / (2L)) become exact DFT bins.
ComplexVec line_derivative(const Grid& g, const Field& f, int order) {
  const Index n = g.n;
  const Index two_k = 2 * (n - 1);
  const Real period = 2 * g.length();
  ComplexVec ext(two_k);
  for (Index j = 0; j < n; ++j) ext[j] = f[j];
  for (Index j = n; j < two_k; ++j) ext[j] = -f[two_k - j];
  ComplexVec coeffs = fft_fwd(ext);
  for (Index m = 0; m < two_k; ++m) {
    const Real eta = dft_frequency(m, two_k, period);
    if (order == 1) {
      coeffs[m] *= (2 * m == two_k) ? Complex(0, 0) : Complex(0, eta);
    } else {
      coeffs[m] *= -eta * eta;
    }
  }
  const ComplexVec dext = fft_inv(coeffs);
  return dext.head(n);
}

ComplexVec fd_derivative(const Grid& g, const Field& f, int order) {
  const Index n = g.n;
  const Real h = g.spacing();
  ComplexVec out(n);
  if (order == 1) {
    for (Index j = 1; j + 1 < n; ++j) out[j] = (f[j + 1] - f[j - 1]) / (2 * h);
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2 * h);
    out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2 * h);
  } else {
    for (Index j = 1; j + 1 < n; ++j) out[j] = (f[j + 1] - 2.0 * f[j] + f[j - 1]) / (h * h);
    out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (h * h);
    out[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / (h * h);
  }
  return out;
}

// Barycentric differentiation matrix on Chebyshev-Gauss-Lobatto nodes.
RealMat chebyshev_d1(const RealVec& y) {
  const Index n = y.size();
  RealVec lambda(n);
  for (Index j = 0; j < n; ++j) {
    Real sign = (j % 2 == 0) ? 1.0 : -1.0;
    lambda[j] = sign * ((j == 0 || j == n - 1) ? 0.5 : 1.0);
  }
  RealMat d = RealMat::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    Real diag = 0;
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      d(i, j) = (lambda[j] / lambda[i]) / (y[i] - y[j]);
      diag -= d(i, j);
    }
    d(i, i) = diag;
  }
  return d;
}

// Clenshaw-Curtis weights on n = N+1 Chebyshev-Gauss-Lobatto points of [-1,1].
RealVec clenshaw_curtis(Index n) {
  const Index big_n = n - 1;
  RealVec w = RealVec::Zero(n);
  if (big_n == 0) {
    w[0] = 2;
    return w;
  }
  for (Index j = 0; j <= big_n; ++j) {
    const Real theta = kPi * static_cast<Real>(j) / static_cast<Real>(big_n);
    Real sum = 0;
    for (Index m = 1; m <= big_n / 2; ++m) {
      const Real b = (2 * m == big_n) ? 1.0 : 2.0;
      sum += b * std::cos(2.0 * m * theta) / (4.0 * m * m - 1.0);
    }
    Real wj = 1.0 - sum;
    wj *= 2.0 / static_cast<Real>(big_n);
    if (j == 0 || j == big_n) wj *= 0.5;
    w[j] = wj;
  }
  return w;
}

}  // namespace

Grid build_grid(DomainKind kind, Index n, std::optional<Real> half_width, ChannelScheme scheme) {
  if (n < 16) throw ConfigError("grid: point count must be at least 16");
  if (kind == DomainKind::TruncatedLine) {
    if (!half_width) throw ConfigError("grid: truncated line requires a half width");
    if (*half_width < 4) throw ConfigError("grid: truncated-line half width must be >= 4");
  } else if (half_width) {
    throw ConfigError("grid: half width is only meaningful on the truncated line");
  }

  Grid g;
  g.kind = kind;
  g.n = n;
  g.scheme = scheme;
  switch (kind) {
    case DomainKind::Torus: {
      g.boundary = BoundaryKind::Periodic;
      g.half_width = kPi;
      const Real h = 2 * kPi / static_cast<Real>(n);
      g.points = RealVec::LinSpaced(n, -kPi, -kPi + h * static_cast<Real>(n - 1));
      g.quadrature_weights = RealVec::Constant(n, h);
      break;
    }
    case DomainKind::TruncatedLine: {
      g.boundary = BoundaryKind::Dirichlet;
      g.half_width = *half_width;
      g.points = RealVec::LinSpaced(n, -g.half_width, g.half_width);
      const Real h = g.spacing();
      g.quadrature_weights = RealVec::Constant(n, h);
      g.quadrature_weights[0] = h / 2;
      g.quadrature_weights[n - 1] = h / 2;
      break;
    }
    case DomainKind::Channel: {
      g.boundary = BoundaryKind::Dirichlet;
      g.half_width = 1.0;
      if (scheme == ChannelScheme::FiniteDifference) {
        g.points = RealVec::LinSpaced(n, -1.0, 1.0);
        const Real h = g.spacing();
        g.quadrature_weights = RealVec::Constant(n, h);
        g.quadrature_weights[0] = h / 2;
        g.quadrature_weights[n - 1] = h / 2;
      } else {
        g.points = RealVec(n);
        for (Index j = 0; j < n; ++j)
          g.points[j] = -std::cos(kPi * static_cast<Real>(j) / static_cast<Real>(n - 1));
        g.points[0] = -1.0;
        g.points[n - 1] = 1.0;
        g.quadrature_weights = clenshaw_curtis(n);
        g.cheb_d1 = chebyshev_d1(g.points);
      }
      break;
    }
  }
  return g;
}

Field derivative(const Grid& g, const Field& f, int order) {
  if (order != 1 && order != 2) throw ConfigError("derivative: order must be 1 or 2");
  require_conforming(g, f);
  switch (g.kind) {
    case DomainKind::Torus:
      return torus_derivative(g, f, order);
    case DomainKind::TruncatedLine:
      return line_derivative(g, f, order);
    case DomainKind::Channel:
      if (g.scheme == ChannelScheme::Chebyshev) {
        ComplexVec d = g.cheb_d1 * f;
        if (order == 2) d = g.cheb_d1 * d;
        return d;
      }
      return fd_derivative(g, f, order);
  }
  throw ConfigError("derivative: unknown grid kind");
}

Complex inner_product(const Grid& g, const Field& f, const Field& h) {
  require_conforming(g, f);
  require_conforming(g, h);
  Complex acc(0, 0);
  for (Index j = 0; j < g.n; ++j) acc += g.quadrature_weights[j] * f[j] * std::conj(h[j]);
  return acc;
}

Real l2_norm(const Grid& g, const Field& f) {
  const Real sq = inner_product(g, f, f).real();
  return std::sqrt(std::max(sq, Real(0)));
}

Real h1_seminorm(const Grid& g, const Field& f) { return l2_norm(g, derivative(g, f, 1)); }

void require_conforming(const Grid& g, const Field& f) {
  if (f.size() != g.n) throw ConfigError("field does not conform to grid");
}

RealMat dense_derivative_matrix(const Grid& g) {
  if (g.kind == DomainKind::Channel && g.scheme == ChannelScheme::Chebyshev) return g.cheb_d1;
  RealMat d(g.n, g.n);
  Field unit = Field::Zero(g.n);
  for (Index j = 0; j < g.n; ++j) {
    unit[j] = Complex(1, 0);
    const Field col = derivative(g, unit, 1);
    for (Index i = 0; i < g.n; ++i) d(i, j) = col[i].real();
    unit[j] = Complex(0, 0);
  }
  return d;
}

}  // namespace shearlab
