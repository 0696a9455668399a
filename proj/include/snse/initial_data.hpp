#pragma once

// Seeded smooth test fields.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <random>

#include "snse/fields.hpp"
#include "snse/operators.hpp"
#include "snse/spectral.hpp"

namespace snse {

/// Taylor-Green vortex with wavenumber 2 pi m / L along every axis.
inline RealVectorField taylor_green(const Grid& g, double amplitude, int m = 1) {
  RealVectorField u(g);
  for_each_point(g, [&](std::size_t idx, int i0, int i1, int i2) {
    const double x = kTwoPi * m * g.coordinate(0, i0) / g.extent(0);
    const double y = kTwoPi * m * g.coordinate(1, i1) / g.extent(1);
    const double z = g.dim() == 3 ? kTwoPi * m * g.coordinate(2, i2) / g.extent(2) : 0.0;
    const double cz = std::cos(z);
    u.component(0)[idx] = amplitude * std::sin(x) * std::cos(y) * cz;
    u.component(1)[idx] = -amplitude * std::cos(x) * std::sin(y) * cz;
  });
  return u;
}

/// Random trigonometric polynomial with integer frequencies |m_a| <= max_mode
/// (Nyquist excluded), mean zero, scaled to root-mean-square `rms`, optionally
/// Leray-projected.
inline RealVectorField random_smooth_field(const Grid& g, std::uint64_t seed, int max_mode, double rms,
                                           bool divergence_free = true) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  RealVectorField noise(g);
  for (int j = 0; j < noise.components(); ++j)
    for (auto& v : noise.component(j)) v = normal(eng);
  auto F = forward_transform(noise);
  apply_multiplier_inplace(F, [&](const WaveVector& k) {
    if (k.is_zero()) return 0.0;
    for (int a = 0; a < g.dim(); ++a)
      if (k.nyquist[a] || std::abs(std::lround(k.xi[a] * g.extent(a))) > max_mode) return 0.0;
    return 1.0;
  });
  if (divergence_free) leray_project_inplace(F);
  auto u = inverse_transform(F);
  const double cur = lp_norm(u, 2.0) / std::sqrt(g.volume());
  if (cur > 0.0) u *= rms / cur;
  return u;
}

/// random_smooth_field times the envelope exp(-|x - x_c|^2 / (2 w^2)) around the
/// box center: data decaying away from the center, as L^p data on the whole
/// space would. Scaled to root-mean-square `rms` over the box.
inline RealVectorField localized_random_field(const Grid& g, std::uint64_t seed, int max_mode, double rms, double width) {
  require(width > 0.0, "envelope width must be positive");
  auto u = random_smooth_field(g, seed, max_mode, 1.0, false);
  for_each_point(g, [&](std::size_t idx, int i0, int i1, int i2) {
    const std::array<int, 3> i{i0, i1, i2};
    double r2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) r2 += std::pow(g.coordinate(a, i[a]) - 0.5 * g.extent(a), 2);
    const double w = std::exp(-0.5 * r2 / (width * width));
    for (int j = 0; j < u.components(); ++j) u.component(j)[idx] *= w;
  });
  const double cur = lp_norm(u, 2.0) / std::sqrt(g.volume());
  if (cur > 0.0) u *= rms / cur;
  return u;
}

}  // namespace snse
