#pragma once

// Truncated stochastic Navier-Stokes system
//
//   du = [Delta u - phi(||u||_p)^2 P<=k Leray div(u (x) P<=k u)] dt
//        + phi(||u||_p)^2 P<=k sigma(P<=k u) dW,
//
// its Picard iteration, and the initial-data preparation
// P<=k Leray(phi(|x - x_c|/n) u0).

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "snse/error.hpp"
#include "snse/fields.hpp"
#include "snse/grid.hpp"
#include "snse/heat_solver.hpp"
#include "snse/ledger.hpp"
#include "snse/noise.hpp"
#include "snse/operators.hpp"
#include "snse/spectral.hpp"
#include "snse/stopping.hpp"

namespace snse {

struct SnseConfig {
  Grid grid = Grid::cube(3, 32, kDefaultBoxSide);
  double p = 4.0;
  double k = 8.0;  // projector level of P<=k
  double N = 1.0;  // cutoff level of phi
  NoiseModel noise = NoiseModel::inverse_k(16, NoiseKind::linear_mollified, 1.0, 0);
  double dt = 1e-3;
  double T = 0.2;
  std::uint64_t seed = 0;
  bool dealias = false;  // extra 2/3-rule mask on the nonlinearity
  bool nonlinear_enabled = true;
  bool noise_enabled = true;

  void validate() const {
    require(p > 2.0, "SNSE solver needs p > 2");
    require(k >= 1.0 && std::isfinite(k), "projector level k must be >= 1");
    require(N > 0.0 && std::isfinite(N), "cutoff level N must be positive");
    require(grid.dim() >= 2, "SNSE solver needs d >= 2");
    step_count(T, dt);
    if (noise_enabled) noise.validate();
  }

  std::size_t steps() const { return step_count(T, dt); }
};

/// max |xi . U| / ||u||_2 (0 for the zero field).
inline double relative_divergence(const SpectralVectorField& U) {
  const double n = l2_norm_from_spectrum(U);
  return n == 0.0 ? 0.0 : spectral_divergence_max(U) / n;
}

/// Precomputed multipliers and noise map for one configuration.
class SnseOperator {
 public:
  explicit SnseOperator(SnseConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    const Grid& g = cfg_.grid;
    projector_ = gaussian_symbol(g, cfg_.k);
    decay_ = heat_decay_factors(g, cfg_.dt);
    if (cfg_.dealias) {
      mask_.assign(g.points(), 1.0);
      for_each_point(g, [&](std::size_t idx, int i0, int i1, int i2) {
        const std::array<int, 3> i{i0, i1, i2};
        for (int a = 0; a < g.dim(); ++a)
          if (3 * std::abs(g.integer_frequency(a, i[a])) > g.size(a)) mask_[idx] = 0.0;
      });
    }
    if (cfg_.noise_enabled) sigma_.emplace(cfg_.noise, g);
  }

  const SnseConfig& config() const noexcept { return cfg_; }
  const std::vector<double>& projector_symbol() const noexcept { return projector_; }
  const std::vector<double>& decay() const noexcept { return decay_; }

  double phi(const RealVectorField& u) const { return cutoff_phi(lp_norm(u, cfg_.p), CutoffSpec{cfg_.N}); }

  /// sum_i d_i (u_i v) in spectral space, before any projection.
  SpectralVectorField convective_spectrum(const RealVectorField& u, const RealVectorField& v) const {
    const Grid& g = u.grid();
    const int d = g.dim();
    SpectralVectorField out(g);
    std::vector<double> prod(g.points());
    for (int i = 0; i < d; ++i) {
      auto ui = u.component(i);
      for (int j = 0; j < d; ++j) {
        auto vj = v.component(j);
        for (std::size_t x = 0; x < prod.size(); ++x) prod[x] = ui[x] * vj[x];
        const auto P = forward_scalar(g, prod);
        auto dst = out.component(j);
        for_each_frequency(g, [&](std::size_t idx, const WaveVector& kv) { dst[idx] += derivative_symbol(kv, i) * P[idx]; });
      }
    }
    return out;
  }

  /// P<=k Leray div(u (x) P<=k u), spectral, without the cutoff factor.
  SpectralVectorField drift_spectrum(const RealVectorField& u, const SpectralVectorField& U) const {
    auto V = U;
    multiply_inplace(V, projector_);
    auto B = convective_spectrum(u, inverse_transform(V));
    leray_project_inplace(B);
    multiply_inplace(B, projector_);
    if (!mask_.empty()) multiply_inplace(B, mask_);
    return B;
  }

  /// P<=k of the shared sigma profile evaluated at P<=k u.
  SpectralVectorField noise_profile_spectrum(const SpectralVectorField& U) const {
    auto V = U;
    multiply_inplace(V, projector_);
    auto S = sigma_->profile_spectrum(inverse_transform(V));
    multiply_inplace(S, projector_);
    return S;
  }

  /// U <- decay * (U - dt c B(v) + c w S(v)), with c the cutoff gate and
  /// w = sum_k a_k dW_k. Drift and noise are evaluated on (v, V), which may
  /// alias U; a zero gate skips them entirely.
  void advance(SpectralVectorField& U, double gate, const RealVectorField& v, const SpectralVectorField& V,
               const WienerIncrement& dW) const {
    if (gate != 0.0) {
      std::optional<SpectralVectorField> B, S;
      if (cfg_.nonlinear_enabled) {
        B = drift_spectrum(v, V);
        *B *= Complex(-cfg_.dt * gate);
      }
      if (cfg_.noise_enabled) {
        S = noise_profile_spectrum(V);
        *S *= Complex(gate * sigma_->weighted_increment(dW));
      }
      if (B) U += *B;
      if (S) U += *S;
    }
    multiply_inplace(U, decay_);
  }

  WienerIncrement increment(std::size_t step) const {
    return wiener_increment(cfg_.seed, step, cfg_.dt, cfg_.noise_enabled ? cfg_.noise.K : 1);
  }

 private:
  SnseConfig cfg_;
  std::vector<double> projector_;
  std::vector<double> decay_;
  std::vector<double> mask_;
  std::optional<SigmaMap> sigma_;
};

/// phi(||u||_p)^2 P<=k Leray(sum_i d_i (u_i P<=k u)), returned in physical space.
/// The solver subtracts this term.
inline RealVectorField nonlinear_term(const RealVectorField& u, const SnseConfig& cfg) {
  require(u.all_finite(), "nonlinear term needs a finite field");
  SnseConfig c = cfg;
  c.noise_enabled = false;
  const SnseOperator op(c);
  const double phi = op.phi(u);
  if (phi == 0.0) return RealVectorField(u.grid());
  auto B = op.drift_spectrum(u, forward_transform(u));
  B *= Complex(phi * phi);
  return inverse_transform(B);
}

struct SnseState {
  double t = 0.0;
  RealVectorField u;
  std::size_t step_index = 0;
};

/// Stateful stepper for the direct truncated system.
class SnseSolver {
 public:
  /// `initial` must already be divergence-free (see prepare_initial_data).
  SnseSolver(SnseConfig cfg, const RealVectorField& initial) : op_(std::move(cfg)), u_(initial), U_(forward_transform(initial)) {
    require(initial.grid() == op_.config().grid, "initial data lives on a different grid");
    require(initial.all_finite(), "initial data must be finite");
    require(relative_divergence(U_) <= 1e-8, "initial data is not divergence-free");
    phi_ = op_.phi(u_);
  }

  const SnseConfig& config() const noexcept { return op_.config(); }
  const SnseOperator& op() const noexcept { return op_; }
  const RealVectorField& u() const noexcept { return u_; }
  const SpectralVectorField& spectrum() const noexcept { return U_; }
  double t() const noexcept { return t_; }
  std::size_t step_index() const noexcept { return step_; }
  /// Cutoff value phi(||u||_p) of the current state.
  double phi() const noexcept { return phi_; }
  /// Cutoff gate phi^2 applied on the most recent step.
  double last_gate() const noexcept { return last_gate_; }

  void step(const WienerIncrement& dW) {
    last_gate_ = phi_ * phi_;
    op_.advance(U_, last_gate_, u_, U_, dW);
    u_ = inverse_transform(U_);
    ++step_;
    t_ = step_ * op_.config().dt;
    if (!u_.all_finite()) throw NumericalFailure("SNSE step produced a non-finite state", step_);
    phi_ = op_.phi(u_);
  }

  /// Step with the configuration's own noise path.
  void step() { step(op_.increment(step_)); }

  SnseState state() const { return {t_, u_, step_}; }

 private:
  SnseOperator op_;
  RealVectorField u_;
  SpectralVectorField U_;
  double t_ = 0.0;
  std::size_t step_ = 0;
  double phi_ = 1.0;
  double last_gate_ = 1.0;
};

inline SnseState snse_step(const SnseState& state, const SnseConfig& cfg, const WienerIncrement& dW) {
  SnseSolver s(cfg, state.u);
  s.step(dW);
  return {state.t + cfg.dt, s.u(), state.step_index + 1};
}

// ---------------------------------------------------------------------------
// Initial data

/// Radial spatial cutoff phi(|x - x_c| / n) with the N = 1 profile: 1 within
/// radius 2n of the box center, 0 beyond 4n.
inline RealVectorField spatial_cutoff(const RealVectorField& u, double n) {
  require(n >= 1.0, "initial-data level n must be >= 1");
  const Grid& g = u.grid();
  RealVectorField out = u;
  const CutoffSpec spec{1.0};
  for_each_point(g, [&](std::size_t idx, int i0, int i1, int i2) {
    const std::array<int, 3> i{i0, i1, i2};
    double r2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
      const double x = g.coordinate(a, i[a]) - 0.5 * g.extent(a);
      r2 += x * x;
    }
    const double w = cutoff_phi(std::sqrt(r2) / n, spec);
    for (int j = 0; j < u.components(); ++j) out.component(j)[idx] *= w;
  });
  return out;
}

/// P<=k Leray(phi(|x - x_c|/n) u0).
inline RealVectorField prepare_initial_data(const RealVectorField& u0_raw, double n, double k) {
  auto U = forward_transform(spatial_cutoff(u0_raw, n));
  leray_project_inplace(U);
  multiply_inplace(U, gaussian_symbol(u0_raw.grid(), k));
  return inverse_transform(U);
}

/// P<=k Leray u0 (no spatial cutoff).
inline RealVectorField project_initial_data(const RealVectorField& u0_raw, double k) {
  auto U = forward_transform(u0_raw);
  leray_project_inplace(U);
  multiply_inplace(U, gaussian_symbol(u0_raw.grid(), k));
  return inverse_transform(U);
}

enum class KSchedule { identity, energy };

/// Projector level for initial-data level n: k(n) = n, or the smallest
/// integer greater than n ||phi(./n) u0||_2^2.
inline double k_for_level(KSchedule schedule, double n, const RealVectorField& u0_raw) {
  if (schedule == KSchedule::identity) return n;
  const double l2 = lp_norm(spatial_cutoff(u0_raw, n), 2.0);
  return std::floor(n * l2 * l2) + 1.0;
}

// ---------------------------------------------------------------------------
// Picard iteration

/// States at steps 0..steps.
using Trajectory = std::vector<RealVectorField>;

/// Base iterate: the noise-free heat flow of `initial`.
inline Trajectory heat_flow_trajectory(const SnseConfig& cfg, const RealVectorField& initial) {
  const std::size_t steps = cfg.steps();
  const auto decay = heat_decay_factors(cfg.grid, cfg.dt);
  Trajectory out;
  out.reserve(steps + 1);
  out.push_back(initial);
  auto U = forward_transform(initial);
  for (std::size_t n = 0; n < steps; ++n) {
    multiply_inplace(U, decay);
    out.push_back(inverse_transform(U));
  }
  return out;
}

/// Next Picard iterate: drift and noise coefficients are evaluated on the
/// previous iterate, the gate is phi(||u^(m)||_p) phi(||u^(m-1)||_p), and the
/// noise path is the configuration's frozen path.
inline Trajectory picard_iterate(const Trajectory& previous, const SnseConfig& cfg, const RealVectorField& initial) {
  const std::size_t steps = cfg.steps();
  require(previous.size() == steps + 1, "previous iterate does not cover the configured horizon");
  const SnseOperator op(cfg);
  Trajectory out;
  out.reserve(steps + 1);
  out.push_back(initial);
  auto U = forward_transform(initial);
  for (std::size_t n = 0; n < steps; ++n) {
    const auto& v = previous[n];
    const double gate = op.phi(out.back()) * op.phi(v);
    op.advance(U, gate, v, forward_transform(v), op.increment(n));
    out.push_back(inverse_transform(U));
    if (!out.back().all_finite()) throw NumericalFailure("Picard iterate produced a non-finite state", n + 1);
  }
  return out;
}

/// sup_t ||a(t) - b(t)||_p over two trajectories of equal length.
inline double trajectory_sup_distance(const Trajectory& a, const Trajectory& b, double p) {
  require(a.size() == b.size(), "trajectories cover different horizons");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, lp_norm(a[i] - b[i], p));
  return d;
}

/// Direct stepper trajectory on the configuration's own noise path.
inline Trajectory direct_trajectory(const SnseConfig& cfg, const RealVectorField& initial) {
  SnseSolver s(cfg, initial);
  Trajectory out{initial};
  for (std::size_t n = 0; n < cfg.steps(); ++n) {
    s.step();
    out.push_back(s.u());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Full run with ledger and stopping monitor

struct MonitorSpec {
  double M = 1.0;
  double K = 1.0;
  bool stop_at_tau = true;
};

struct SnseRun {
  EnergyLedger ledger;
  StoppingRecord stopping;
  RealVectorField final_state;
  std::vector<SnseState> snapshots;
};

/// Quarter bound sum_j ||P<=k(phi(./n) u0_j)||_p^p + ||P<=k(phi(./n) u0)||_p^p,
/// with the Leray projection applied as in the prepared data.
inline double quarter_bound_functional(const RealVectorField& prepared, double p) {
  double s = std::pow(lp_norm(prepared, p), p);
  for (int j = 0; j < prepared.components(); ++j) s += std::pow(lp_norm(prepared.grid(), prepared.component(j), p), p);
  return s;
}

/// Smallest M0 >= 1 with quarter_bound_functional <= M0 K^p / 4.
inline double quarter_bound_M0(const RealVectorField& prepared, double p, double K) {
  return std::max(1.0, 4.0 * quarter_bound_functional(prepared, p) / std::pow(K, p));
}

/// Runs the direct stepper from prepare_initial_data(u0_raw, n_level, k) (or
/// P<=k Leray u0 when no level is given), recording the ledger every step and
/// stopping at tau when requested. Snapshots are kept every `snapshot_stride`
/// steps (0 disables them).
inline SnseRun snse_solve(const SnseConfig& cfg, const RealVectorField& u0_raw, std::optional<double> n_level,
                          const MonitorSpec& monitor, std::size_t snapshot_stride = 0) {
  cfg.validate();
  const auto initial = n_level ? prepare_initial_data(u0_raw, *n_level, cfg.k) : project_initial_data(u0_raw, cfg.k);
  SnseSolver solver(cfg, initial);
  StoppingMonitor mon(monitor.M, monitor.K, cfg.p);
  mon.record().M0 = quarter_bound_M0(initial, cfg.p, monitor.K);
  mon.record().quarter_bound_ok = monitor.M >= mon.record().M0;

  SnseRun run{EnergyLedger(cfg.p), {}, initial, {}};
  run.ledger.record(0.0, energy_sample(solver.u(), solver.spectrum(), cfg.p), solver.phi());
  if (snapshot_stride > 0) run.snapshots.push_back(solver.state());
  bool stopped = mon.observe(run.ledger.back(), 0);
  const std::size_t steps = cfg.steps();
  for (std::size_t n = 0; n < steps && !(stopped && monitor.stop_at_tau); ++n) {
    solver.step();
    run.ledger.record(solver.t(), energy_sample(solver.u(), solver.spectrum(), cfg.p), solver.phi());
    stopped = mon.observe(run.ledger.back(), n + 1) || stopped;
    if (snapshot_stride > 0 && (solver.step_index() % snapshot_stride == 0)) run.snapshots.push_back(solver.state());
  }
  if (mon.record().triggered && monitor.stop_at_tau) run.ledger.mark_stopped();
  run.stopping = mon.record();
  run.final_state = solver.u();
  return run;
}

}  // namespace snse
