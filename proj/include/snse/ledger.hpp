#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "snse/error.hpp"
#include "snse/fields.hpp"
#include "snse/spectral.hpp"

namespace snse {

/// Stencil order of the finite-difference gradient used for |u_j|^{p/2}.
inline constexpr int kEnergyFdOrder = 6;

/// sum_j int |grad |u_j|^{p/2}|^2 dx with a centered finite-difference gradient.
inline double gradient_energy(const RealVectorField& u, double p, int fd_order = kEnergyFdOrder) {
  const Grid& g = u.grid();
  std::vector<double> w(g.points());
  double total = 0.0;
  for (int j = 0; j < u.components(); ++j) {
    auto c = u.component(j);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::pow(std::abs(c[i]), 0.5 * p);
    for (int a = 0; a < g.dim(); ++a) {
      const auto d = gradient_fd(g, w, a, fd_order);
      double s = 0.0;
      for (double v : d) s += v * v;
      total += s;
    }
  }
  return total * g.volume_element();
}

/// Instantaneous energy functionals of one state.
struct EnergySample {
  double lp_p = 0.0;         // ||u||_p^p
  double l3p_p = 0.0;        // ||u||_{3p}^p
  double grad_energy = 0.0;  // sum_j ||grad |u_j|^{p/2}||_2^2
  double l2_sq = 0.0;        // ||u||_2^2
  double grad_l2_sq = 0.0;   // ||grad u||_2^2
};

inline EnergySample energy_sample(const RealVectorField& u, const SpectralVectorField& U, double p) {
  EnergySample s;
  s.lp_p = std::pow(lp_norm(u, p), p);
  s.l3p_p = std::pow(lp_norm(u, 3.0 * p), p);
  s.grad_energy = gradient_energy(u, p);
  const double l2 = l2_norm_from_spectrum(U);
  s.l2_sq = l2 * l2;
  s.grad_l2_sq = gradient_l2_squared_from_spectrum(U);
  return s;
}

inline EnergySample energy_sample(const RealVectorField& u, double p) {
  return energy_sample(u, forward_transform(u), p);
}

struct LedgerRow {
  double t = 0.0;
  double lp_p = 0.0;
  double sup_lp_p = 0.0;
  double grad_energy_cum = 0.0;
  double l3p_cum = 0.0;
  double phi_value = 1.0;
  bool stopped = false;
  // In-memory only (not part of the CSV schema).
  double l2_sq = 0.0;
  double grad_l2_cum = 0.0;
};

/// Time series of the L^p energy functionals of one trajectory. Cumulative
/// columns use the trapezoid rule at the sampling resolution.
class EnergyLedger {
 public:
  explicit EnergyLedger(double p = 4.0) : p_(p) {}
  EnergyLedger(double p, std::vector<LedgerRow> rows) : p_(p), rows_(std::move(rows)) {}

  double p() const noexcept { return p_; }
  const std::vector<LedgerRow>& rows() const noexcept { return rows_; }
  bool empty() const noexcept { return rows_.empty(); }
  std::size_t size() const noexcept { return rows_.size(); }
  const LedgerRow& back() const { return rows_.back(); }

  void record(double t, const EnergySample& s, double phi_value = 1.0) {
    LedgerRow r;
    r.t = t;
    r.lp_p = s.lp_p;
    r.phi_value = phi_value;
    r.l2_sq = s.l2_sq;
    if (rows_.empty()) {
      r.sup_lp_p = s.lp_p;
    } else {
      const LedgerRow& prev = rows_.back();
      require(t >= prev.t, "ledger times must be nondecreasing");
      const double dt = t - prev.t;
      r.sup_lp_p = std::max(prev.sup_lp_p, s.lp_p);
      r.grad_energy_cum = prev.grad_energy_cum + 0.5 * dt * (last_->grad_energy + s.grad_energy);
      r.l3p_cum = prev.l3p_cum + 0.5 * dt * (last_->l3p_p + s.l3p_p);
      r.grad_l2_cum = prev.grad_l2_cum + 0.5 * dt * (last_->grad_l2_sq + s.grad_l2_sq);
    }
    rows_.push_back(r);
    last_ = s;
  }

  void mark_stopped() {
    if (!rows_.empty()) rows_.back().stopped = true;
  }

  /// sup_t ||u||_2^2 + int ||grad u||_2^2 ds over the recorded window.
  double l2_envelope() const {
    double sup = 0.0;
    for (const auto& r : rows_) sup = std::max(sup, r.l2_sq);
    return rows_.empty() ? 0.0 : sup + rows_.back().grad_l2_cum;
  }

  /// sup_t ||u||_p^p + sum_j int int |grad |u_j|^{p/2}|^2 over the recorded window.
  double lp_envelope() const {
    return rows_.empty() ? 0.0 : rows_.back().sup_lp_p + rows_.back().grad_energy_cum;
  }

 private:
  double p_;
  std::vector<LedgerRow> rows_;
  std::optional<EnergySample> last_;
};

}  // namespace snse
