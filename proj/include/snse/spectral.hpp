#pragma once

// Transforms, Fourier multipliers, quadrature norms and derivatives on the
// periodic lattice.
//
// Normalization: forward_transform approximates F(f)(xi) = int exp(-2 pi i xi.x) f(x) dx
// by a rectangle rule, so a constant c maps to c * volume at xi = 0, and
// inverse_transform divides by the box volume. Parseval reads
// ||f||_2^2 = (1/V) sum |F(f)|^2.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "snse/error.hpp"
#include "snse/fft.hpp"
#include "snse/fields.hpp"
#include "snse/grid.hpp"

namespace snse {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline std::vector<Complex> forward_scalar(const Grid& g, std::span<const double> f) {
  require(f.size() == g.points(), "scalar array length does not match grid");
  std::vector<Complex> out(g.points());
  detail::plan_for(g).forward(f, out, g.volume_element());
  return out;
}

inline std::vector<double> inverse_scalar(const Grid& g, std::span<const Complex> F) {
  require(F.size() == g.points(), "spectral array length does not match grid");
  std::vector<double> out(g.points());
  detail::plan_for(g).inverse(F, out, 1.0 / g.volume());
  return out;
}

inline SpectralVectorField forward_transform(const RealVectorField& f) {
  SpectralVectorField out(f.grid());
  auto& plan = detail::plan_for(f.grid());
  for (int j = 0; j < f.components(); ++j)
    plan.forward(f.component(j), out.component(j), f.grid().volume_element());
  return out;
}

inline RealVectorField inverse_transform(const SpectralVectorField& F) {
  RealVectorField out(F.grid());
  auto& plan = detail::plan_for(F.grid());
  for (int j = 0; j < F.components(); ++j)
    plan.inverse(F.component(j), out.component(j), 1.0 / F.grid().volume());
  return out;
}

/// Multiply every component by m(xi). `m` takes a WaveVector and returns a
/// real or complex value; non-finite values are rejected.
template <class Multiplier>
void apply_multiplier_inplace(SpectralVectorField& F, Multiplier&& m) {
  const int d = F.components();
  bool finite = true;
  for_each_frequency(F.grid(), [&](std::size_t idx, const WaveVector& k) {
    const auto value = m(k);
    if constexpr (std::is_floating_point_v<std::decay_t<decltype(value)>>) {
      if (!std::isfinite(value)) finite = false;
    } else {
      if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) finite = false;
    }
    for (int j = 0; j < d; ++j) F.component(j)[idx] *= value;
  });
  if (!finite) throw PreconditionError("Fourier multiplier is not finite on the lattice");
}

template <class Multiplier>
SpectralVectorField apply_multiplier(SpectralVectorField F, Multiplier&& m) {
  apply_multiplier_inplace(F, std::forward<Multiplier>(m));
  return F;
}

/// Symbol of d/dx_axis: 2 pi i xi_axis, set to zero on the Nyquist plane of that
/// axis so real fields stay real.
inline Complex derivative_symbol(const WaveVector& k, int axis) noexcept {
  if (k.nyquist[axis]) return {0.0, 0.0};
  return {0.0, kTwoPi * k.xi[axis]};
}

/// Symbol of the Laplacian: -4 pi^2 |xi|^2.
inline double laplacian_symbol(const WaveVector& k) noexcept {
  return -4.0 * std::numbers::pi * std::numbers::pi * k.norm2();
}

inline std::vector<Complex> spectral_derivative(const Grid& g, std::span<const Complex> F, int axis) {
  std::vector<Complex> out(F.begin(), F.end());
  for_each_frequency(g, [&](std::size_t idx, const WaveVector& k) { out[idx] *= derivative_symbol(k, axis); });
  return out;
}

inline RealVectorField laplacian(const RealVectorField& f) {
  return inverse_transform(apply_multiplier(forward_transform(f), laplacian_symbol));
}

/// max over xi of |xi . F(xi)|, Nyquist components dropped as in the derivative.
inline double spectral_divergence_max(const SpectralVectorField& F) {
  double worst = 0.0;
  for_each_frequency(F.grid(), [&](std::size_t idx, const WaveVector& k) {
    const auto r = k.resolved();
    Complex s = 0.0;
    for (int j = 0; j < F.components(); ++j) s += r[j] * F.component(j)[idx];
    worst = std::max(worst, std::abs(s));
  });
  return worst;
}

inline double spectral_divergence_max(const RealVectorField& f) {
  return spectral_divergence_max(forward_transform(f));
}

// ---------------------------------------------------------------------------
// Norms (rectangle-rule quadrature, exact for trigonometric polynomials).

namespace detail {

inline double lp_from_magnitudes(const Grid& g, std::size_t n, double p, auto&& magnitude) {
  require(p >= 1.0 || std::isinf(p), "L^p norm needs p >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, magnitude(i));
    return m;
  }
  double s = 0.0;
  if (p == 2.0) {
    for (std::size_t i = 0; i < n; ++i) {
      const double a = magnitude(i);
      s += a * a;
    }
    return std::sqrt(s * g.volume_element());
  }
  for (std::size_t i = 0; i < n; ++i) s += std::pow(magnitude(i), p);
  return std::pow(s * g.volume_element(), 1.0 / p);
}

}  // namespace detail

/// (sum_x |f(x)|^p dV)^(1/p) with |f| the Euclidean length of the d-vector;
/// p = infinity gives the max norm.
inline double lp_norm(const RealVectorField& f, double p) {
  return detail::lp_from_magnitudes(f.grid(), f.points(), p, [&](std::size_t i) { return f.magnitude(i); });
}

inline double lp_norm(const Grid& g, std::span<const double> f, double p) {
  require(f.size() == g.points(), "scalar array length does not match grid");
  return detail::lp_from_magnitudes(g, f.size(), p, [&](std::size_t i) { return std::abs(f[i]); });
}

inline double max_norm(const RealVectorField& f) {
  return lp_norm(f, std::numeric_limits<double>::infinity());
}

/// L^p norm (in space) of the pointwise l2 norm over modes: the s = 0 member
/// of the l2-valued Sobolev scale.
inline double hs_lp_norm(const LtwoSequenceField& G, double p) {
  return detail::lp_from_magnitudes(G.grid(), G.grid().points(), p,
                                    [&](std::size_t i) { return G.pointwise_l2(i); });
}

/// ||f||_2 computed from the spectrum via Parseval.
inline double l2_norm_from_spectrum(const SpectralVectorField& F) {
  double s = 0.0;
  for (int j = 0; j < F.components(); ++j)
    for (const auto& c : F.component(j)) s += std::norm(c);
  return std::sqrt(s / F.grid().volume());
}

/// ||grad f||_2^2 = (1/V) sum 4 pi^2 |xi|^2 |F|^2.
inline double gradient_l2_squared_from_spectrum(const SpectralVectorField& F) {
  double s = 0.0;
  for_each_frequency(F.grid(), [&](std::size_t idx, const WaveVector& k) {
    double a = 0.0;
    for (int j = 0; j < F.components(); ++j) a += std::norm(F.component(j)[idx]);
    s += -laplacian_symbol(k) * a;
  });
  return s / F.grid().volume();
}

/// || |grad f| ||_q with the Frobenius norm of the spectral Jacobian.
inline double gradient_lp_norm(const RealVectorField& f, double q) {
  const Grid& g = f.grid();
  const auto F = forward_transform(f);
  std::vector<double> sq(g.points(), 0.0);
  for (int j = 0; j < f.components(); ++j)
    for (int a = 0; a < g.dim(); ++a) {
      const auto d = inverse_scalar(g, spectral_derivative(g, F.component(j), a));
      for (std::size_t i = 0; i < sq.size(); ++i) sq[i] += d[i] * d[i];
    }
  for (auto& v : sq) v = std::sqrt(v);
  return lp_norm(g, sq, q);
}

// ---------------------------------------------------------------------------
// Finite differences.

/// Centered periodic finite difference of a scalar array along `axis`.
/// order is 2 (default), 4 or 6.
inline std::vector<double> gradient_fd(const Grid& g, std::span<const double> f, int axis, int order = 2) {
  require(f.size() == g.points(), "scalar array length does not match grid");
  require(axis >= 0 && axis < g.dim(), "finite-difference axis out of range");
  static constexpr double c2[] = {0.5};
  static constexpr double c4[] = {2.0 / 3.0, -1.0 / 12.0};
  static constexpr double c6[] = {3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0};
  std::span<const double> coeff;
  switch (order) {
    case 2: coeff = c2; break;
    case 4: coeff = c4; break;
    case 6: coeff = c6; break;
    default: throw PreconditionError("finite-difference order must be 2, 4 or 6");
  }
  const auto& n = g.sizes();
  const double inv_h = 1.0 / g.spacing(axis);
  std::vector<double> out(f.size());
  for_each_point(g, [&](std::size_t idx, int i0, int i1, int i2) {
    std::array<int, 3> base{i0, i1, i2};
    double acc = 0.0;
    for (std::size_t s = 0; s < coeff.size(); ++s) {
      const int off = static_cast<int>(s) + 1;
      auto plus = base, minus = base;
      plus[axis] = (base[axis] + off) % n[axis];
      minus[axis] = (base[axis] - off + n[axis]) % n[axis];
      acc += coeff[s] * (f[g.index(plus[0], plus[1], plus[2])] - f[g.index(minus[0], minus[1], minus[2])]);
    }
    out[idx] = acc * inv_h;
  });
  return out;
}

}  // namespace snse
