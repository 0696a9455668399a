#pragma once

// Stochastic heat equation du = (Delta u + grad f) dt + g dW on the periodic box,
// stepped with the exponential (integrating-factor) Euler-Maruyama scheme.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "snse/error.hpp"
#include "snse/fields.hpp"
#include "snse/ledger.hpp"
#include "snse/noise.hpp"
#include "snse/spectral.hpp"

namespace snse {

struct HeatState {
  double t = 0.0;
  RealVectorField u;
  std::size_t step_index = 0;
};

/// exp(-4 pi^2 |xi|^2 dt) for every lattice frequency.
inline std::vector<double> heat_decay_factors(const Grid& g, double dt) {
  std::vector<double> out(g.points());
  for_each_frequency(g, [&](std::size_t idx, const WaveVector& k) { out[idx] = std::exp(laplacian_symbol(k) * dt); });
  return out;
}

/// Number of steps of size dt covering [0, T]; dt must divide T.
inline std::size_t step_count(double T, double dt) {
  require(T > 0.0 && std::isfinite(T), "horizon T must be positive");
  require(dt > 0.0 && std::isfinite(dt), "time step dt must be positive");
  const double n = std::round(T / dt);
  require(n >= 1.0 && std::abs(n * dt - T) <= 1e-9 * T, "dt must divide T");
  return static_cast<std::size_t>(n);
}

/// One step: U <- exp(-4 pi^2 |xi|^2 dt) (U + dt F(drift) + sum_k F(g_k) dW_k).
/// `drift` is the already-differentiated forcing grad f.
inline HeatState heat_step(const HeatState& state, const RealVectorField* drift, const LtwoSequenceField* g,
                           const WienerIncrement& dW, double dt) {
  require(dt > 0.0, "heat step needs dt > 0");
  const Grid& grid = state.u.grid();
  auto U = forward_transform(state.u);
  if (drift != nullptr) {
    require(drift->grid() == grid, "drift lives on a different grid");
    auto D = forward_transform(*drift);
    D *= dt;
    U += D;
  }
  if (g != nullptr) {
    require(g->modes() == dW.modes(), "noise coefficient has " + std::to_string(g->modes()) +
                                          " modes but the Wiener increment has " + std::to_string(dW.modes()));
    for (int k = 0; k < g->modes(); ++k) {
      auto G = forward_transform(g->mode(k));
      G *= dW.dW[k];
      U += G;
    }
  }
  multiply_inplace(U, heat_decay_factors(grid, dt));
  HeatState next{state.t + dt, inverse_transform(U), state.step_index + 1};
  if (!next.u.all_finite()) throw NumericalFailure("heat step produced a non-finite state", next.step_index);
  return next;
}

inline HeatState heat_step(const HeatState& state, const RealVectorField& drift, const LtwoSequenceField& g,
                           const WienerIncrement& dW, double dt) {
  return heat_step(state, &drift, &g, dW, dt);
}

/// Time-dependent data of the heat problem; empty callables mean zero data.
struct HeatProblem {
  std::function<RealVectorField(double t)> drift;
  std::function<LtwoSequenceField(double t, const RealVectorField& u)> noise;
  int noise_modes = 1;
};

struct HeatRun {
  std::vector<HeatState> trajectory;
  EnergyLedger ledger;
};

/// Iterates heat_step from u0 over [0, T]. The ledger is sampled every step;
/// states are kept every `store_stride` steps (0 keeps only the final state).
inline HeatRun heat_solve(const RealVectorField& u0, const HeatProblem& problem, double T, double dt,
                          std::uint64_t seed, double p = 4.0, std::size_t store_stride = 1) {
  const std::size_t steps = step_count(T, dt);
  require(u0.all_finite(), "initial data must be finite");
  require(problem.noise_modes >= 1, "heat problem needs at least one noise mode");
  const Grid& grid = u0.grid();
  const auto decay = heat_decay_factors(grid, dt);

  HeatRun run{{}, EnergyLedger(p)};
  HeatState state{0.0, u0, 0};
  auto U = forward_transform(u0);
  run.ledger.record(0.0, energy_sample(state.u, U, p));
  if (store_stride > 0) run.trajectory.push_back(state);

  for (std::size_t n = 0; n < steps; ++n) {
    const double t = n * dt;
    if (problem.drift) {
      auto D = forward_transform(problem.drift(t));
      D *= dt;
      U += D;
    }
    if (problem.noise) {
      const auto G = problem.noise(t, state.u);
      require(G.modes() == problem.noise_modes, "noise callback returned the wrong number of modes");
      const auto dW = wiener_increment(seed, n, dt, problem.noise_modes);
      for (int k = 0; k < G.modes(); ++k) {
        auto Gk = forward_transform(G.mode(k));
        Gk *= dW.dW[k];
        U += Gk;
      }
    }
    multiply_inplace(U, decay);
    state.u = inverse_transform(U);
    state.t = (n + 1) * dt;
    state.step_index = n + 1;
    if (!state.u.all_finite()) throw NumericalFailure("heat solve produced a non-finite state", n + 1);
    run.ledger.record(state.t, energy_sample(state.u, U, p));
    if (store_stride > 0 && ((n + 1) % store_stride == 0 || n + 1 == steps)) run.trajectory.push_back(state);
  }
  if (store_stride == 0) run.trajectory.push_back(state);
  return run;
}

// ---------------------------------------------------------------------------
// Ito dissipation identity and the interpolation exponent

struct DissipationCheck {
  double lhs = 0.0;  // p sum_j int |u_j|^{p-2} u_j Delta u_j
  double rhs = 0.0;  // -(4(p-1)/p) sum_j int |grad |u_j|^{p/2}|^2
  double relative_error = 0.0;
};

inline DissipationCheck dissipation_identity_check(const RealVectorField& u, double p) {
  require(p > 2.0, "dissipation identity check needs p > 2");
  const Grid& g = u.grid();
  const auto lap = laplacian(u);
  double lhs = 0.0;
  for (int j = 0; j < u.components(); ++j) {
    auto c = u.component(j);
    auto l = lap.component(j);
    for (std::size_t i = 0; i < c.size(); ++i) lhs += std::pow(std::abs(c[i]), p - 2.0) * c[i] * l[i];
  }
  DissipationCheck out;
  out.lhs = p * lhs * g.volume_element();
  out.rhs = -(4.0 * (p - 1.0) / p) * gradient_energy(u, p);
  const double scale = std::max(std::abs(out.lhs), std::abs(out.rhs));
  out.relative_error = scale == 0.0 ? 0.0 : std::abs(out.lhs - out.rhs) / scale;
  return out;
}

/// Lower end dp/(p+d-2) of the admissible window for q.
inline double interpolation_window_lower(double p, int d) { return d * p / (p + d - 2.0); }

/// alpha = d(p-q)/(pq-2q) for dp/(p+d-2) < q <= p; alpha lies in [0, 1] there.
inline double interpolation_exponent(double p, double q, int d) {
  require(p > 2.0 && d >= 1, "interpolation exponent needs p > 2");
  const double lo = interpolation_window_lower(p, d);
  require(q > lo && q <= p, "q = " + std::to_string(q) + " outside the admissible window (" + std::to_string(lo) +
                                ", " + std::to_string(p) + "]");
  const double alpha = d * (p - q) / (p * q - 2.0 * q);
  require(alpha >= 0.0 && alpha <= 1.0 + 1e-12, "interpolation exponent left [0, 1]");
  return alpha;
}

}  // namespace snse
