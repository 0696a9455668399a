#pragma once

#include <fftw3.h>

#include <array>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>

#include "snse/grid.hpp"

namespace snse::detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// In-place complex FFTW plans for one lattice shape. FFTW_ESTIMATE keeps the
/// plan (and therefore every result) independent of timing measurements.
class FftPlan {
 public:
  explicit FftPlan(const Grid& g) : n_(g.points()) {
    buf_ = fftw_alloc_complex(n_);
    std::array<int, 3> dims{};
    for (int a = 0; a < g.dim(); ++a) dims[a] = g.size(a);
    std::lock_guard lock(fftw_planner_mutex());
    fwd_ = fftw_plan_dft(g.dim(), dims.data(), buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft(g.dim(), dims.data(), buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  ~FftPlan() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(buf_);
  }

  /// out[m] = scale * sum_x in[x] exp(-2 pi i m.x / n)
  void forward(std::span<const double> in, std::span<std::complex<double>> out, double scale) {
    for (std::size_t i = 0; i < n_; ++i) {
      buf_[i][0] = in[i];
      buf_[i][1] = 0.0;
    }
    fftw_execute(fwd_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = {buf_[i][0] * scale, buf_[i][1] * scale};
  }

  /// out[x] = scale * Re sum_m in[m] exp(+2 pi i m.x / n)
  void inverse(std::span<const std::complex<double>> in, std::span<double> out, double scale) {
    for (std::size_t i = 0; i < n_; ++i) {
      buf_[i][0] = in[i].real();
      buf_[i][1] = in[i].imag();
    }
    fftw_execute(bwd_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = buf_[i][0] * scale;
  }

 private:
  std::size_t n_;
  fftw_complex* buf_ = nullptr;
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
};

/// Per-thread plan cache keyed by lattice shape.
inline FftPlan& plan_for(const Grid& g) {
  thread_local std::map<std::array<int, 4>, std::unique_ptr<FftPlan>> cache;
  const std::array<int, 4> key{g.dim(), g.size(0), g.size(1), g.size(2)};
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, std::make_unique<FftPlan>(g)).first;
  return *it->second;
}

}  // namespace snse::detail
