#pragma once

// Stopping-time, Cauchy-distance and coupling diagnostics for families of
// truncated approximants.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "snse/error.hpp"
#include "snse/initial_data.hpp"
#include "snse/ledger.hpp"
#include "snse/snse_solver.hpp"
#include "snse/spectral.hpp"
#include "snse/stopping.hpp"

namespace snse {

/// max_j ||v_j||_{3p}^p / ||grad |v_j|^{p/2}||_2^2 on mean-zero components.
/// Zero components contribute 0.
inline double sobolev_ratio(const RealVectorField& v, double p) {
  require(p >= 1.0, "Sobolev ratio needs p >= 1");
  const Grid& g = v.grid();
  double best = 0.0;
  std::vector<double> w(g.points());
  for (int j = 0; j < v.components(); ++j) {
    auto c = v.component(j);
    double mean = 0.0, peak = 0.0;
    for (double x : c) {
      mean += x;
      peak = std::max(peak, std::abs(x));
    }
    mean /= static_cast<double>(c.size());
    if (peak == 0.0) continue;
    require(std::abs(mean) <= 1e-8 * peak, "Sobolev ratio needs mean-zero components");
    const double num = std::pow(lp_norm(g, c, 3.0 * p), p);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::pow(std::abs(c[i]), 0.5 * p);
    double den = 0.0;
    for (int a = 0; a < g.dim(); ++a)
      for (double d : gradient_fd(g, w, a, kEnergyFdOrder)) den += d * d;
    den *= g.volume_element();
    require(den > 0.0, "Sobolev ratio denominator vanishes for a nonzero component");
    best = std::max(best, num / den);
  }
  return best;
}

struct CauchyReport {
  double n = 0.0;
  double m = 0.0;
  double sup_dist_p = 0.0;   // sup_t ||u^n - u^m||_p^p on [0, tau_{n,m}]
  double int_dist_3p = 0.0;  // int_0^{tau_{n,m}} ||u^n - u^m||_{3p}^p ds
  double tau_n = std::numeric_limits<double>::infinity();
  double tau_m = std::numeric_limits<double>::infinity();
  double horizon = 0.0;  // tau_n ^ tau_m ^ T
};

struct LevelRun {
  double n = 0.0;
  double k = 0.0;
  EnergyLedger ledger;
  StoppingRecord stopping;
};

struct CauchyStudy {
  std::vector<LevelRun> levels;
  std::vector<CauchyReport> reports;  // consecutive pairs (n_i, n_{i+1})
};

namespace detail {

struct PairAccumulator {
  std::size_t a = 0, b = 0;
  bool open = true;
  double sup = 0.0, integral = 0.0, last_3p = 0.0, t_end = 0.0;
};

inline void accumulate_pair(PairAccumulator& acc, const RealVectorField& ua, const RealVectorField& ub, double p,
                            double t, double dt, bool first) {
  const auto diff = ua - ub;
  const double dp = std::pow(lp_norm(diff, p), p);
  const double d3p = std::pow(lp_norm(diff, 3.0 * p), p);
  acc.sup = std::max(acc.sup, dp);
  if (!first) acc.integral += 0.5 * dt * (acc.last_3p + d3p);
  acc.last_3p = d3p;
  acc.t_end = t;
}

}  // namespace detail

/// Runs every level of `n_list` in lockstep on the shared noise path of
/// `cfg.seed`, each from prepare_initial_data(u0_raw, n, k(n)), and reports the
/// Cauchy functionals of consecutive pairs up to the pairwise minimum of the
/// stopping times and the horizon.
inline CauchyStudy cauchy_study(const SnseConfig& cfg, const std::vector<double>& n_list, const RealVectorField& u0_raw,
                                KSchedule schedule, const MonitorSpec& monitor) {
  require(n_list.size() >= 2, "Cauchy study needs at least two levels");
  // Any order is accepted: duplicated levels give zero distance and a reversed
  // pair reproduces the forward report.
  for (double n : n_list) require(n >= 1.0, "Cauchy study levels must be >= 1");
  cfg.validate();

  std::vector<SnseSolver> solvers;
  std::vector<StoppingMonitor> monitors;
  CauchyStudy out;
  for (double n : n_list) {
    SnseConfig c = cfg;
    c.k = k_for_level(schedule, n, u0_raw);
    const auto init = prepare_initial_data(u0_raw, n, c.k);
    solvers.emplace_back(c, init);
    monitors.emplace_back(monitor.M, monitor.K, cfg.p);
    monitors.back().record().M0 = quarter_bound_M0(init, cfg.p, monitor.K);
    monitors.back().record().quarter_bound_ok = monitor.M >= monitors.back().record().M0;
    out.levels.push_back({n, c.k, EnergyLedger(cfg.p), {}});
  }
  const std::size_t L = solvers.size();
  std::vector<bool> active(L, true);
  std::vector<detail::PairAccumulator> pairs;
  for (std::size_t i = 0; i + 1 < L; ++i) pairs.push_back({i, i + 1});

  auto observe = [&](std::size_t step) {
    for (std::size_t i = 0; i < L; ++i) {
      if (!active[i]) continue;
      auto& s = solvers[i];
      out.levels[i].ledger.record(s.t(), energy_sample(s.u(), s.spectrum(), cfg.p), s.phi());
      if (monitors[i].observe(out.levels[i].ledger.back(), step)) {
        out.levels[i].ledger.mark_stopped();
        active[i] = false;
      }
    }
  };
  auto update_pairs = [&](bool first) {
    for (auto& pr : pairs) {
      if (!pr.open) continue;
      const auto& sa = solvers[pr.a];
      const auto& sb = solvers[pr.b];
      detail::accumulate_pair(pr, sa.u(), sb.u(), cfg.p, sa.t(), cfg.dt, first);
      // The window closes at the first stopping time of either level.
      if (!active[pr.a] || !active[pr.b]) pr.open = false;
    }
  };

  observe(0);
  update_pairs(true);
  const std::size_t steps = cfg.steps();
  for (std::size_t n = 0; n < steps; ++n) {
    bool any = false;
    for (std::size_t i = 0; i < L; ++i)
      if (active[i]) {
        solvers[i].step();
        any = true;
      }
    if (!any) break;
    observe(n + 1);
    update_pairs(false);
  }

  for (std::size_t i = 0; i < L; ++i) out.levels[i].stopping = monitors[i].record();
  for (const auto& pr : pairs) {
    CauchyReport r;
    r.n = n_list[pr.a];
    r.m = n_list[pr.b];
    r.sup_dist_p = pr.sup;
    r.int_dist_3p = pr.integral;
    r.tau_n = out.levels[pr.a].stopping.tau;
    r.tau_m = out.levels[pr.b].stopping.tau;
    r.horizon = std::min({r.tau_n, r.tau_m, cfg.T});
    out.reports.push_back(r);
  }
  return out;
}

enum class Perturbation { none, tiny, different_seed };

struct UniquenessResult {
  double max_deviation = 0.0;       // sup_t ||u1 - u2||_p
  double relative_deviation = 0.0;  // max_deviation / sup_t ||u1||_p
  double initial_deviation = 0.0;
  double final_deviation = 0.0;
  double horizon = 0.0;
  std::vector<double> times;
  std::vector<double> deviations;  // ||u1(t) - u2(t)||_p
};

/// Relative size of the `tiny` initial perturbation.
inline constexpr double kTinyPerturbation = 1e-10;

/// Two independently constructed solvers on the same data and noise path
/// (or a perturbed variant), compared in sup_t L^p up to the first stopping
/// time of either run.
inline UniquenessResult uniqueness_check(const SnseConfig& cfg, const RealVectorField& u0_raw, std::optional<double> n_level,
                                         Perturbation perturbation, const MonitorSpec& monitor) {
  cfg.validate();
  const auto prepare = [&](const RealVectorField& raw) {
    return n_level ? prepare_initial_data(raw, *n_level, cfg.k) : project_initial_data(raw, cfg.k);
  };
  auto raw_b = u0_raw;
  SnseConfig cfg_b = cfg;
  if (perturbation == Perturbation::tiny) {
    const double rms = lp_norm(u0_raw, 2.0) / std::sqrt(u0_raw.grid().volume());
    raw_b += random_smooth_field(u0_raw.grid(), derive_seed(cfg.seed, 0x7e57), 2, kTinyPerturbation * rms);
  } else if (perturbation == Perturbation::different_seed) {
    cfg_b.seed = derive_seed(cfg.seed, 1);
  }
  SnseSolver a(cfg, prepare(u0_raw));
  SnseSolver b(cfg_b, prepare(raw_b));
  StoppingMonitor ma(monitor.M, monitor.K, cfg.p), mb(monitor.M, monitor.K, cfg.p);
  EnergyLedger la(cfg.p), lb(cfg.p);

  UniquenessResult out;
  double sup_a = 0.0;
  auto sample = [&](std::size_t step) {
    const double dev = lp_norm(a.u() - b.u(), cfg.p);
    out.times.push_back(a.t());
    out.deviations.push_back(dev);
    out.max_deviation = std::max(out.max_deviation, dev);
    sup_a = std::max(sup_a, lp_norm(a.u(), cfg.p));
    la.record(a.t(), energy_sample(a.u(), a.spectrum(), cfg.p));
    lb.record(b.t(), energy_sample(b.u(), b.spectrum(), cfg.p));
    const bool sa = ma.observe(la.back(), step);
    const bool sb = mb.observe(lb.back(), step);
    return !(sa || sb || ma.record().triggered || mb.record().triggered);
  };
  bool go = sample(0);
  for (std::size_t n = 0; n < cfg.steps() && go; ++n) {
    a.step();
    b.step();
    go = sample(n + 1);
  }
  out.initial_deviation = out.deviations.front();
  out.final_deviation = out.deviations.back();
  out.horizon = out.times.back();
  out.relative_deviation = sup_a == 0.0 ? out.max_deviation : out.max_deviation / sup_a;
  return out;
}

}  // namespace snse
