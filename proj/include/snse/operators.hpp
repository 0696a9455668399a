#pragma once

// Fourier-multiplier and convolution operators: the Gaussian projector P<=n
// and its direct-space counterpart, the Leray projector, the Bessel potential
// J^s, the compactly supported mollifier and the truncation cutoff phi.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "snse/error.hpp"
#include "snse/fields.hpp"
#include "snse/grid.hpp"
#include "snse/spectral.hpp"

namespace snse {

// ---------------------------------------------------------------------------
// Gaussian projector

namespace detail {

/// Per-axis lattice symbol of P<=n: the DFT of the sampled, periodized kernel
/// n sqrt(pi) exp(-pi^2 n^2 x^2), normalized to unit mass. By Poisson summation
/// this is sum_j exp(-((m + jN)/(L n))^2) / sum_j exp(-(jN/(L n))^2), which equals
/// exp(-(m/(L n))^2) up to the aliasing tail exp(-((N-|m|)/(L n))^2). Once
/// L n is comparable to N the kernel is narrower than a grid cell and the
/// lattice operator is close to the identity.
inline std::vector<double> gaussian_axis_symbol(int N, double L, double n) {
  const int J = static_cast<int>(std::ceil(6.5 * L * n / N)) + 1;
  auto aliased = [&](int m) {
    double s = 0.0;
    for (int j = -J; j <= J; ++j) {
      const double r = (m + static_cast<double>(j) * N) / (L * n);
      s += std::exp(-r * r);
    }
    return s;
  };
  const double mass = aliased(0);
  std::vector<double> out(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) out[i] = aliased(i < N / 2 ? i : i - N) / mass;
  return out;
}

/// Unit-mass sampled periodized Gaussian kernel along one axis (values of the
/// 1-D kernel at x = i h; the d-dimensional kernel is the product).
inline std::vector<double> gaussian_axis_kernel(int N, double L, double n) {
  const double h = L / N;
  const int J = static_cast<int>(std::ceil(6.5 / (std::numbers::pi * n * L))) + 1;
  const double pi2n2 = std::numbers::pi * std::numbers::pi * n * n;
  std::vector<double> k(static_cast<std::size_t>(N));
  double mass = 0.0;
  for (int i = 0; i < N; ++i) {
    double s = 0.0;
    for (int j = -J; j <= J; ++j) {
      const double x = i * h + j * L;
      s += n * std::sqrt(std::numbers::pi) * std::exp(-pi2n2 * x * x);
    }
    k[i] = s;
    mass += s * h;
  }
  for (auto& v : k) v /= mass;
  return k;
}

}  // namespace detail

/// Lattice symbol of P<=n on grid g, one real value per frequency.
inline std::vector<double> gaussian_symbol(const Grid& g, double n) {
  require(n > 0.0 && std::isfinite(n), "projector level n must be positive");
  std::array<std::vector<double>, 3> axis;
  for (int a = 0; a < 3; ++a)
    axis[a] = a < g.dim() ? detail::gaussian_axis_symbol(g.size(a), g.extent(a), n) : std::vector<double>{1.0};
  std::vector<double> out(g.points());
  for_each_point(g, [&](std::size_t idx, int i0, int i1, int i2) { out[idx] = axis[0][i0] * axis[1][i1] * axis[2][i2]; });
  return out;
}

inline void multiply_inplace(SpectralVectorField& F, const std::vector<double>& symbol) {
  for (int j = 0; j < F.components(); ++j) {
    auto c = F.component(j);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= symbol[i];
  }
}

inline SpectralVectorField gaussian_projector(SpectralVectorField F, double n) {
  multiply_inplace(F, gaussian_symbol(F.grid(), n));
  return F;
}

/// P<=n f = F^{-1}(psi(xi/n) F f) with psi(xi) = exp(-|xi|^2).
inline RealVectorField gaussian_projector(const RealVectorField& f, double n) {
  return inverse_transform(gaussian_projector(forward_transform(f), n));
}

inline LtwoSequenceField gaussian_projector(const LtwoSequenceField& G, double n) {
  const auto symbol = gaussian_symbol(G.grid(), n);
  std::vector<RealVectorField> out;
  out.reserve(static_cast<std::size_t>(G.modes()));
  for (const auto& m : G.all_modes()) {
    auto F = forward_transform(m);
    multiply_inplace(F, symbol);
    out.push_back(inverse_transform(F));
  }
  return LtwoSequenceField(G.grid(), std::move(out));
}

inline constexpr std::size_t kDirectConvolutionMaxPoints = 32 * 32 * 32;

/// Brute-force circular convolution with the sampled, periodized, unit-mass
/// kernel pi^{d/2} n^d exp(-pi^2 n^2 |x|^2). O(points^2).
inline RealVectorField gaussian_projector_direct(const RealVectorField& f, double n) {
  const Grid& g = f.grid();
  require(n > 0.0 && std::isfinite(n), "projector level n must be positive");
  require(g.points() <= kDirectConvolutionMaxPoints, "grid too large for direct convolution (limit 32^3)");
  std::array<std::vector<double>, 3> axis;
  for (int a = 0; a < 3; ++a)
    axis[a] = a < g.dim() ? detail::gaussian_axis_kernel(g.size(a), g.extent(a), n) : std::vector<double>{1.0};
  std::vector<double> kernel(g.points());
  for_each_point(g, [&](std::size_t idx, int i0, int i1, int i2) { kernel[idx] = axis[0][i0] * axis[1][i1] * axis[2][i2]; });

  const auto& N = g.sizes();
  const double dv = g.volume_element();
  RealVectorField out(g);
  for (int j = 0; j < f.components(); ++j) {
    auto src = f.component(j);
    auto dst = out.component(j);
    for_each_point(g, [&](std::size_t x, int x0, int x1, int x2) {
      double acc = 0.0;
      for_each_point(g, [&](std::size_t y, int y0, int y1, int y2) {
        const int z0 = (x0 - y0 + N[0]) % N[0], z1 = (x1 - y1 + N[1]) % N[1], z2 = (x2 - y2 + N[2]) % N[2];
        acc += kernel[y] * src[g.index(z0, z1, z2)];
      });
      dst[x] = acc * dv;
    });
  }
  return out;
}

inline LtwoSequenceField gaussian_projector_direct(const LtwoSequenceField& G, double n) {
  std::vector<RealVectorField> out;
  for (const auto& m : G.all_modes()) out.push_back(gaussian_projector_direct(m, n));
  return LtwoSequenceField(G.grid(), std::move(out));
}

// ---------------------------------------------------------------------------
// Leray projector

/// (P u)_j = sum_k (delta_jk - xi_j xi_k / |xi|^2) u_k for xi != 0; the mean is kept.
/// Nyquist components of xi are dropped (see WaveVector::resolved), so the
/// projector is Hermitian-symmetric and annihilates spectral gradients exactly.
inline void leray_project_inplace(SpectralVectorField& F) {
  const int d = F.components();
  require(d >= 2, "Leray projection needs d >= 2");
  for_each_frequency(F.grid(), [&](std::size_t idx, const WaveVector& k) {
    const auto r = k.resolved();
    const double r2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
    if (r2 == 0.0) return;
    Complex dot = 0.0;
    for (int j = 0; j < d; ++j) dot += r[j] * F.component(j)[idx];
    const Complex s = dot / r2;
    for (int j = 0; j < d; ++j) F.component(j)[idx] -= r[j] * s;
  });
}

inline SpectralVectorField leray_project(SpectralVectorField F) {
  leray_project_inplace(F);
  return F;
}

inline RealVectorField leray_project(const RealVectorField& f) {
  return inverse_transform(leray_project(forward_transform(f)));
}

inline LtwoSequenceField leray_project(const LtwoSequenceField& G) {
  std::vector<RealVectorField> out;
  for (const auto& m : G.all_modes()) out.push_back(leray_project(m));
  return LtwoSequenceField(G.grid(), std::move(out));
}

// ---------------------------------------------------------------------------
// Bessel potential

inline RealVectorField bessel_potential(const RealVectorField& f, double s) {
  require(std::isfinite(s), "Bessel potential order must be finite");
  if (s == 0.0) return f;
  const double c = 4.0 * std::numbers::pi * std::numbers::pi;
  return inverse_transform(apply_multiplier(forward_transform(f), [&](const WaveVector& k) {
    return std::pow(1.0 + c * k.norm2(), 0.5 * s);
  }));
}

inline LtwoSequenceField bessel_potential(const LtwoSequenceField& G, double s) {
  std::vector<RealVectorField> out;
  for (const auto& m : G.all_modes()) out.push_back(bessel_potential(m, s));
  return LtwoSequenceField(G.grid(), std::move(out));
}

// ---------------------------------------------------------------------------
// Mollifier

/// Convolution with rho_eps(x) = eps^{-d} rho(x/eps), where
/// rho(x) ~ exp(-1/(1 - 4|x|^2)) on |x| < 1/2. The kernel is sampled at
/// minimum-image displacements and renormalized to unit discrete mass, so it
/// is positive and mass preserving on the lattice.
class Mollifier {
 public:
  Mollifier(const Grid& g, double eps) : grid_(g), eps_(eps) {
    require(eps > 0.0 && eps < 0.5 * g.min_extent(), "mollifier width must lie in (0, L/2)");
    std::vector<double> kernel(g.points(), 0.0);
    double mass = 0.0;
    for_each_point(g, [&](std::size_t idx, int i0, int i1, int i2) {
      const std::array<int, 3> i{i0, i1, i2};
      double r2 = 0.0;
      for (int a = 0; a < g.dim(); ++a) {
        const int m = i[a] < g.size(a) / 2 ? i[a] : i[a] - g.size(a);
        const double x = m * g.spacing(a) / eps;
        r2 += x * x;
      }
      if (4.0 * r2 < 1.0) {
        kernel[idx] = std::exp(-1.0 / (1.0 - 4.0 * r2));
        mass += kernel[idx];
      }
    });
    for (auto& v : kernel) v /= mass * g.volume_element();
    const auto K = forward_scalar(g, kernel);
    symbol_.resize(K.size());
    for (std::size_t i = 0; i < K.size(); ++i) symbol_[i] = K[i].real();
  }

  const Grid& grid() const noexcept { return grid_; }
  double width() const noexcept { return eps_; }
  const std::vector<double>& symbol() const noexcept { return symbol_; }

  void apply_inplace(SpectralVectorField& F) const {
    require(F.grid() == grid_, "mollifier built for a different grid");
    multiply_inplace(F, symbol_);
  }

  RealVectorField operator()(const RealVectorField& f) const {
    auto F = forward_transform(f);
    apply_inplace(F);
    return inverse_transform(F);
  }

 private:
  Grid grid_;
  double eps_;
  std::vector<double> symbol_;
};

inline RealVectorField mollify(const RealVectorField& f, double eps) { return Mollifier(f.grid(), eps)(f); }

inline LtwoSequenceField mollify(const LtwoSequenceField& G, double eps) {
  const Mollifier rho(G.grid(), eps);
  std::vector<RealVectorField> out;
  for (const auto& m : G.all_modes()) out.push_back(rho(m));
  return LtwoSequenceField(G.grid(), std::move(out));
}

// ---------------------------------------------------------------------------
// Truncation cutoff

/// phi == 1 on [0, 2N], phi == 0 on [4N, inf), quintic smoothstep bridge between.
struct CutoffSpec {
  double N = 1.0;

  /// sup |phi'| = (15/8) / (2N).
  double lipschitz_constant() const noexcept { return 15.0 / (16.0 * N); }
};

inline double cutoff_phi(double t, const CutoffSpec& spec) {
  require(spec.N > 0.0, "cutoff level N must be positive");
  require(t >= 0.0, "cutoff argument must be nonnegative");
  const double lo = 2.0 * spec.N;
  if (t <= lo) return 1.0;
  if (t >= 4.0 * spec.N) return 0.0;
  // 1 - S(s) written as S(1 - s), which stays in [0, 1] in floating point.
  const double u = 1.0 - (t - lo) / lo;
  return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

}  // namespace snse
