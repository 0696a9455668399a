#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "snse/error.hpp"
#include "snse/grid.hpp"

namespace snse {

using Complex = std::complex<double>;

namespace detail {

/// d-component array of samples over a Grid; shared layout of the physical and
/// spectral vector fields.
template <class T>
class ComponentArray {
 public:
  explicit ComponentArray(Grid grid)
      : grid_(std::move(grid)),
        comps_(static_cast<std::size_t>(grid_.dim()), std::vector<T>(grid_.points())) {}

  ComponentArray(Grid grid, std::vector<std::vector<T>> comps)
      : grid_(std::move(grid)), comps_(std::move(comps)) {
    require(comps_.size() == static_cast<std::size_t>(grid_.dim()),
            "component count " + std::to_string(comps_.size()) +
                " does not match grid dimension " + std::to_string(grid_.dim()));
    for (const auto& c : comps_)
      require(c.size() == grid_.points(), "component length does not match grid point count");
  }

  const Grid& grid() const noexcept { return grid_; }
  int components() const noexcept { return static_cast<int>(comps_.size()); }
  std::size_t points() const noexcept { return grid_.points(); }

  std::span<T> component(int j) noexcept { return comps_[j]; }
  std::span<const T> component(int j) const noexcept { return comps_[j]; }
  std::vector<T>& data(int j) noexcept { return comps_[j]; }
  const std::vector<T>& data(int j) const noexcept { return comps_[j]; }

  bool all_finite() const noexcept {
    for (const auto& c : comps_)
      for (const auto& v : c)
        if (!is_finite(v)) return false;
    return true;
  }

 protected:
  static bool is_finite(double v) noexcept { return std::isfinite(v); }
  static bool is_finite(const Complex& v) noexcept {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  }

  void check_same_grid(const ComponentArray& o) const {
    require(grid_ == o.grid_, "fields live on different grids");
  }

  Grid grid_;
  std::vector<std::vector<T>> comps_;
};

}  // namespace detail

/// Real d-vector field sampled on the lattice (velocity, forcing, noise modes).
class RealVectorField : public detail::ComponentArray<double> {
 public:
  using ComponentArray::ComponentArray;

  RealVectorField& operator+=(const RealVectorField& o) {
    check_same_grid(o);
    for (int j = 0; j < components(); ++j)
      for (std::size_t i = 0; i < points(); ++i) comps_[j][i] += o.comps_[j][i];
    return *this;
  }
  RealVectorField& operator-=(const RealVectorField& o) {
    check_same_grid(o);
    for (int j = 0; j < components(); ++j)
      for (std::size_t i = 0; i < points(); ++i) comps_[j][i] -= o.comps_[j][i];
    return *this;
  }
  RealVectorField& operator*=(double s) {
    for (auto& c : comps_)
      for (auto& v : c) v *= s;
    return *this;
  }

  friend RealVectorField operator+(RealVectorField a, const RealVectorField& b) { return a += b; }
  friend RealVectorField operator-(RealVectorField a, const RealVectorField& b) { return a -= b; }
  friend RealVectorField operator*(double s, RealVectorField a) { return a *= s; }

  /// Euclidean length of the d-vector at flat index i.
  double magnitude(std::size_t i) const noexcept {
    double s = 0.0;
    for (const auto& c : comps_) s += c[i] * c[i];
    return std::sqrt(s);
  }

  friend bool operator==(const RealVectorField& a, const RealVectorField& b) {
    return a.grid_ == b.grid_ && a.comps_ == b.comps_;
  }
};

/// Fourier coefficients of a RealVectorField, indexed by lattice frequency.
class SpectralVectorField : public detail::ComponentArray<Complex> {
 public:
  using ComponentArray::ComponentArray;

  SpectralVectorField& operator+=(const SpectralVectorField& o) {
    check_same_grid(o);
    for (int j = 0; j < components(); ++j)
      for (std::size_t i = 0; i < points(); ++i) comps_[j][i] += o.comps_[j][i];
    return *this;
  }
  SpectralVectorField& operator*=(Complex s) {
    for (auto& c : comps_)
      for (auto& v : c) v *= s;
    return *this;
  }
};

/// l2(H, R^d)-valued field: one RealVectorField per retained Hilbert basis vector.
class LtwoSequenceField {
 public:
  LtwoSequenceField(Grid grid, std::vector<RealVectorField> modes)
      : grid_(std::move(grid)), modes_(std::move(modes)) {
    require(!modes_.empty(), "an l2-valued field needs at least one mode");
    for (const auto& m : modes_) require(m.grid() == grid_, "l2-valued field modes live on mixed grids");
  }

  /// K zero modes.
  LtwoSequenceField(const Grid& grid, int K)
      : LtwoSequenceField(grid, std::vector<RealVectorField>(static_cast<std::size_t>(K > 0 ? K : 0),
                                                             RealVectorField(grid))) {}

  const Grid& grid() const noexcept { return grid_; }
  int modes() const noexcept { return static_cast<int>(modes_.size()); }
  const RealVectorField& mode(int k) const noexcept { return modes_[k]; }
  RealVectorField& mode(int k) noexcept { return modes_[k]; }
  const std::vector<RealVectorField>& all_modes() const noexcept { return modes_; }

  /// Euclidean norm over modes and components at flat index i.
  double pointwise_l2(std::size_t i) const noexcept {
    double s = 0.0;
    for (const auto& m : modes_)
      for (int j = 0; j < m.components(); ++j) s += m.component(j)[i] * m.component(j)[i];
    return std::sqrt(s);
  }

 private:
  Grid grid_;
  std::vector<RealVectorField> modes_;
};

}  // namespace snse
