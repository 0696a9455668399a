#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "snse/error.hpp"

namespace snse {

/// Uniform periodic box [0,L_0) x ... x [0,L_{d-1}) sampled on a regular lattice.
///
/// Lattice index i along an axis of size n maps to the integer frequency
/// m = i for i < n/2 and m = i - n otherwise, so the Nyquist index n/2 carries
/// m = -n/2. The physical frequency is xi = m / L (transform kernel
/// exp(-2 pi i xi.x)). For d = 2 the third axis has size 1 and extent 1, which
/// lets every loop in the library run over three indices.
class Grid {
 public:
  Grid(std::vector<int> dims, std::vector<double> extent) {
    require(dims.size() == 2 || dims.size() == 3, "grid dimension must be 2 or 3");
    require(extent.size() == dims.size(), "grid extent count must equal dimension count");
    d_ = static_cast<int>(dims.size());
    for (int a = 0; a < 3; ++a) {
      if (a < d_) {
        require(dims[a] >= 4 && dims[a] % 2 == 0,
                "grid size along axis " + std::to_string(a) + " must be even and >= 4");
        require(std::isfinite(extent[a]) && extent[a] > 0.0,
                "grid extent along axis " + std::to_string(a) + " must be positive");
        n_[a] = dims[a];
        L_[a] = extent[a];
      } else {
        n_[a] = 1;
        L_[a] = 1.0;
      }
    }
  }

  static Grid cube(int d, int n, double L) {
    return Grid(std::vector<int>(static_cast<std::size_t>(d), n),
                std::vector<double>(static_cast<std::size_t>(d), L));
  }

  int dim() const noexcept { return d_; }
  int size(int axis) const noexcept { return n_[axis]; }
  double extent(int axis) const noexcept { return L_[axis]; }
  double spacing(int axis) const noexcept { return L_[axis] / n_[axis]; }
  const std::array<int, 3>& sizes() const noexcept { return n_; }

  std::size_t points() const noexcept {
    return static_cast<std::size_t>(n_[0]) * n_[1] * n_[2];
  }

  double volume() const noexcept {
    double v = 1.0;
    for (int a = 0; a < d_; ++a) v *= L_[a];
    return v;
  }

  double volume_element() const noexcept {
    double v = 1.0;
    for (int a = 0; a < d_; ++a) v *= spacing(a);
    return v;
  }

  double min_extent() const noexcept {
    double m = L_[0];
    for (int a = 1; a < d_; ++a) m = std::min(m, L_[a]);
    return m;
  }

  std::size_t index(int i0, int i1, int i2) const noexcept {
    return (static_cast<std::size_t>(i0) * n_[1] + i1) * n_[2] + i2;
  }

  int integer_frequency(int axis, int i) const noexcept {
    return i < n_[axis] / 2 ? i : i - n_[axis];
  }

  bool is_nyquist(int axis, int i) const noexcept {
    return axis < d_ && i == n_[axis] / 2;
  }

  double frequency(int axis, int i) const noexcept {
    if (axis >= d_) return 0.0;
    return integer_frequency(axis, i) / L_[axis];
  }

  double coordinate(int axis, int i) const noexcept {
    return axis < d_ ? i * spacing(axis) : 0.0;
  }

  /// Frequencies xi = m/L for every lattice index along `axis`.
  std::vector<double> frequencies(int axis) const {
    std::vector<double> out(static_cast<std::size_t>(n_[axis]));
    for (int i = 0; i < n_[axis]; ++i) out[i] = frequency(axis, i);
    return out;
  }

  friend bool operator==(const Grid& a, const Grid& b) noexcept {
    return a.d_ == b.d_ && a.n_ == b.n_ && a.L_ == b.L_;
  }

 private:
  int d_ = 3;
  std::array<int, 3> n_{1, 1, 1};
  std::array<double, 3> L_{1.0, 1.0, 1.0};
};

/// Default box side: 2 pi * 4.
inline constexpr double kDefaultBoxSide = 8.0 * std::numbers::pi;

/// Visit every lattice point as (flat index, i0, i1, i2).
template <class Fn>
void for_each_point(const Grid& g, Fn&& fn) {
  std::size_t idx = 0;
  for (int i0 = 0; i0 < g.size(0); ++i0)
    for (int i1 = 0; i1 < g.size(1); ++i1)
      for (int i2 = 0; i2 < g.size(2); ++i2, ++idx) fn(idx, i0, i1, i2);
}

/// Wave vector seen by Fourier multipliers.
struct WaveVector {
  std::array<double, 3> xi{};
  std::array<bool, 3> nyquist{};
  int dim = 3;

  double norm2() const noexcept { return xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]; }
  bool is_zero() const noexcept { return xi[0] == 0.0 && xi[1] == 0.0 && xi[2] == 0.0; }

  /// xi with the Nyquist components zeroed: the wave vector actually seen by
  /// first derivatives. Using it keeps real fields real under projections.
  std::array<double, 3> resolved() const noexcept {
    std::array<double, 3> r = xi;
    for (int a = 0; a < 3; ++a)
      if (nyquist[a]) r[a] = 0.0;
    return r;
  }
};

/// Visit every lattice frequency as (flat index, wave vector).
template <class Fn>
void for_each_frequency(const Grid& g, Fn&& fn) {
  const auto f0 = g.frequencies(0), f1 = g.frequencies(1), f2 = g.frequencies(2);
  WaveVector k;
  k.dim = g.dim();
  std::size_t idx = 0;
  for (int i0 = 0; i0 < g.size(0); ++i0) {
    k.xi[0] = f0[i0];
    k.nyquist[0] = g.is_nyquist(0, i0);
    for (int i1 = 0; i1 < g.size(1); ++i1) {
      k.xi[1] = f1[i1];
      k.nyquist[1] = g.is_nyquist(1, i1);
      for (int i2 = 0; i2 < g.size(2); ++i2, ++idx) {
        k.xi[2] = f2[i2];
        k.nyquist[2] = g.is_nyquist(2, i2);
        fn(idx, k);
      }
    }
  }
}

}  // namespace snse
