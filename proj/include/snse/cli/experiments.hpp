#pragma once

// The six experiment commands. Each writes its artifacts through an
// ArtifactSink and returns the process exit status (0 ok, 1 failed check).

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "snse/cli/config.hpp"
#include "snse/cli/manifest.hpp"

namespace snse::cli {

/// Runs fn(i) for i in [0, count) on `threads` workers. Results must be stored
/// by index; the exception of the lowest failing index is rethrown.
inline void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex mu;
  int failed_index = count;
  std::exception_ptr failure;
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min(threads, count); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

inline std::string member_tag(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d", i);
  return buf;
}

inline std::string level_tag(double n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", n);
  return buf;
}

/// Noise-path seed of ensemble member i.
inline std::uint64_t member_seed(const ExperimentConfig& c, int i) { return derive_seed(c.master_seed, static_cast<std::uint64_t>(i)); }

/// Raw initial data of ensemble member i (before cutoff and projection).
inline RealVectorField member_initial(const ExperimentConfig& c, int i) {
  const Grid g = c.grid();
  if (c.initial.kind == "zero") return RealVectorField(g);
  if (c.initial.kind == "taylor_green") return taylor_green(g, c.initial.rms);
  if (c.initial.kind == "localized")
    return localized_random_field(g, derive_seed(member_seed(c, i), 0x1d), c.initial.max_mode, c.initial.rms, c.initial.width);
  return random_smooth_field(g, derive_seed(member_seed(c, i), 0x1d), c.initial.max_mode, c.initial.rms);
}

// ---------------------------------------------------------------------------
// verify-operators

struct SuiteResult {
  std::string name;
  double worst = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string measure;
};

/// First absolute moment of the inverse transform of exp(-|xi|^2) in d
/// dimensions, Gamma((d+1)/2) / (pi Gamma(d/2)).
inline double gaussian_kernel_first_moment(int d) {
  return std::tgamma(0.5 * (d + 1)) / (std::numbers::pi * std::tgamma(0.5 * d));
}

inline std::vector<SuiteResult> verify_operator_suites(const ExperimentConfig& c) {
  std::vector<SuiteResult> out;
  auto grid_of = [&](int n) { return Grid(std::vector<int>(c.dims.size(), n), c.L); };
  auto field = [&](const Grid& g, int s, bool smooth) {
    const auto seed = derive_seed(c.master_seed, static_cast<std::uint64_t>(s));
    if (smooth) return random_smooth_field(g, seed, 3, 1.0, false);
    std::mt19937_64 eng(seed);
    std::normal_distribution<double> normal;
    RealVectorField f(g);
    for (int j = 0; j < f.components(); ++j)
      for (auto& v : f.component(j)) v = normal(eng);
    return f;
  };

  SuiteResult contraction{"projector_contraction", 0.0, 1.0 + 1e-10, false, "max ||P f||_q / ||f||_q"};
  SuiteResult direct{"projector_fft_vs_direct", 0.0, 1e-10, false, "max relative error"};
  SuiteResult leray{"leray_idempotence_and_gradients", 0.0, 1e-12, false, "max relative residual"};
  SuiteResult divergence{"leray_divergence", 0.0, 1e-10, false, "max relative spectral divergence"};
  SuiteResult heat{"heat_semigroup_exactness", 0.0, 1e-12, false, "max error over 50 steps"};
  SuiteResult mollifier{"mollifier_unit_mass", 0.0, 1e-12, false, "max error on constants"};
  for (int n : c.verify.sizes) {
    const Grid g = grid_of(n);
    for (int s = 0; s < c.verify.seeds; ++s) {
      const auto f = field(g, s, s % 2 == 0);
      for (double q : {2.0, 4.0, c.p}) {
        const double fq = lp_norm(f, q);
        for (double level : {1.0, 2.0, 8.0})
          contraction.worst = std::max(contraction.worst, lp_norm(gaussian_projector(f, level), q) / fq);
      }
      const auto P = leray_project(f);
      leray.worst = std::max(leray.worst, lp_norm(leray_project(P) - P, 2.0) / lp_norm(f, 2.0));
      divergence.worst = std::max(divergence.worst, spectral_divergence_max(P) / lp_norm(P, 2.0));
      // Spectral gradient of the first component is annihilated.
      const auto F = forward_transform(f);
      SpectralVectorField G(g);
      const auto W = F.component(0);
      for (int a = 0; a < g.dim(); ++a) {
        const auto d = spectral_derivative(g, W, a);
        std::copy(d.begin(), d.end(), G.component(a).begin());
      }
      const auto grad = inverse_transform(G);
      const double gn = lp_norm(grad, 2.0);
      if (gn > 0.0) leray.worst = std::max(leray.worst, lp_norm(leray_project(grad), 2.0) / gn);
    }
    if (g.points() <= 16 * 16 * 16) {
      for (int s = 0; s < std::min(c.verify.seeds, 3); ++s) {
        const auto f = field(g, 100 + s, false);
        for (double level : {0.05, 1.0, 2.0}) {
          const auto a = gaussian_projector(f, level);
          const auto b = gaussian_projector_direct(f, level);
          direct.worst = std::max(direct.worst, max_norm(a - b) / max_norm(b));
        }
      }
    }
    // Single modes against the exact decay factor.
    for (const std::array<int, 3> m : {std::array<int, 3>{1, 0, 0}, {2, 1, 1}, {3, 2, 1}}) {
      RealVectorField u(g);
      double lambda = 0.0;
      for (int a = 0; a < g.dim(); ++a) lambda += std::pow(kTwoPi * m[a] / g.extent(a), 2);
      for_each_point(g, [&](std::size_t idx, int i0, int i1, int i2) {
        const std::array<int, 3> i{i0, i1, i2};
        double ph = 0.0;
        for (int a = 0; a < g.dim(); ++a) ph += kTwoPi * m[a] * g.coordinate(a, i[a]) / g.extent(a);
        u.component(0)[idx] = std::cos(ph);
      });
      HeatState st{0.0, u, 0};
      const double dt = 0.05;
      for (int k = 1; k <= 50; ++k) {
        st = heat_step(st, nullptr, nullptr, WienerIncrement{{0.0}}, dt);
        heat.worst = std::max(heat.worst, max_norm(st.u - std::exp(-lambda * dt * k) * u));
      }
    }
    RealVectorField one(g);
    for (int j = 0; j < one.components(); ++j)
      for (auto& v : one.component(j)) v = 1.0 + j;
    const double eps = 0.25 * *std::min_element(c.L.begin(), c.L.end());
    mollifier.worst = std::max(mollifier.worst, max_norm(mollify(one, eps) - one));
  }

  // Lipschitz dependence on 1/n against the closed-form kernel moment.
  SuiteResult lipschitz{"projector_lipschitz_in_inverse_level", 0.0, 1.0, false,
                        "max ||P<=n f - P<=m f||_q / (C* |1/n - 1/m| ||grad f||_q)"};
  {
    const Grid g = grid_of(*std::max_element(c.verify.sizes.begin(), c.verify.sizes.end()));
    const double C = gaussian_kernel_first_moment(g.dim());
    for (int s = 0; s < std::min(c.verify.seeds, 4); ++s) {
      const auto f = field(g, 200 + s, true);
      for (double q : {2.0, c.p}) {
        const double gq = gradient_lp_norm(f, q);
        for (auto [n, m] : {std::pair{2.0, 4.0}, {4.0, 8.0}, {8.0, 16.0}}) {
          const double lhs = lp_norm(gaussian_projector(f, n) - gaussian_projector(f, m), q);
          lipschitz.worst = std::max(lipschitz.worst, lhs / (C * std::abs(1.0 / n - 1.0 / m) * gq));
        }
      }
    }
  }

  SuiteResult cutoff{"cutoff_profile", 0.0, 1.0 + 1e-9, false, "max observed slope / (15/(16N))"};
  {
    const CutoffSpec spec{c.N};
    bool shape = true;
    double prev = 1.0;
    const double h = 4e-4 * c.N;
    for (int i = 0; i <= 15000; ++i) {
      const double t = i * h;
      const double v = cutoff_phi(t, spec);
      shape = shape && v >= 0.0 && v <= 1.0 && v <= prev;
      if (t <= 2.0 * c.N) shape = shape && v == 1.0;
      if (t >= 4.0 * c.N) shape = shape && v == 0.0;
      if (i > 0) cutoff.worst = std::max(cutoff.worst, (prev - v) / h / spec.lipschitz_constant());
      prev = v;
    }
    if (!shape) cutoff.worst = std::numeric_limits<double>::infinity();
  }

  for (auto* r : {&contraction, &direct, &lipschitz, &leray, &divergence, &heat, &mollifier, &cutoff}) {
    r->passed = std::isfinite(r->worst) && r->worst <= r->tolerance;
    out.push_back(*r);
  }
  return out;
}

inline int run_verify_operators(const ExperimentConfig& c, ArtifactSink& sink) {
  const auto suites = verify_operator_suites(c);
  Json arr = Json::array();
  bool ok = true;
  for (const auto& s : suites) {
    arr.push_back(Json{{"name", s.name}, {"measure", s.measure}, {"worst", s.worst}, {"tolerance", s.tolerance}, {"passed", s.passed}});
    ok = ok && s.passed;
  }
  sink.write_json("verify_operators.json", Json{{"suites", arr}, {"all_passed", ok}});
  return ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// heat-run

inline int run_heat(const ExperimentConfig& c, ArtifactSink& sink) {
  const Grid g = c.grid();
  const auto model = c.noise_model();
  std::optional<SigmaMap> sigma;
  if (c.noise.enabled) sigma.emplace(model, g);
  HeatProblem prob;
  if (sigma) {
    prob.noise = [&](double, const RealVectorField& u) { return sigma->apply(u); };
    prob.noise_modes = model.K;
  }
  std::vector<HeatRun> runs(static_cast<std::size_t>(c.ensemble_size));
  parallel_for(c.ensemble_size, c.threads, [&](int i) {
    runs[i] = heat_solve(member_initial(c, i), prob, c.T, c.dt, member_seed(c, i), c.p, 0);
  });
  Json members = Json::array();
  double mean_lp = 0.0, mean_l2 = 0.0;
  for (int i = 0; i < c.ensemble_size; ++i) {
    const auto& r = runs[i];
    sink.write("heat_ledger_" + member_tag(i) + ".csv", ledger_csv(r.ledger));
    members.push_back(Json{{"index", i},
                           {"seed", member_seed(c, i)},
                           {"sup_lp_p", r.ledger.back().sup_lp_p},
                           {"lp_envelope", r.ledger.lp_envelope()},
                           {"l2_envelope", r.ledger.l2_envelope()}});
    mean_lp += r.ledger.lp_envelope() / c.ensemble_size;
    mean_l2 += r.ledger.l2_envelope() / c.ensemble_size;
  }
  sink.write_json("heat_report.json",
                  Json{{"members", members}, {"mean_lp_envelope", mean_lp}, {"mean_l2_envelope", mean_l2}});
  return 0;
}

// ---------------------------------------------------------------------------
// snse-run

inline int run_snse(const ExperimentConfig& c, ArtifactSink& sink) {
  std::vector<std::optional<SnseRun>> runs(static_cast<std::size_t>(c.ensemble_size));
  parallel_for(c.ensemble_size, c.threads, [&](int i) {
    const auto cfg = c.snse_config(member_seed(c, i));
    const auto raw = member_initial(c, i);
    double M = 1.0;
    if (c.M) {
      M = *c.M;
    } else {
      const auto prepared = c.initial.n_level ? prepare_initial_data(raw, *c.initial.n_level, cfg.k) : project_initial_data(raw, cfg.k);
      M = quarter_bound_M0(prepared, c.p, c.K);
    }
    runs[i].emplace(snse_solve(cfg, raw, c.initial.n_level, MonitorSpec{M, c.K, true}, c.snapshot_stride));
  });
  Json members = Json::array();
  double mean_l2 = 0.0;
  for (int i = 0; i < c.ensemble_size; ++i) {
    const auto& r = *runs[i];
    sink.write("snse_ledger_" + member_tag(i) + ".csv", ledger_csv(r.ledger));
    for (const auto& s : r.snapshots) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "snse_snapshot_%s_%06zu.bin", member_tag(i).c_str(), s.step_index);
      sink.write(buf, encode_snapshot(s.u, c.p, s.t));
    }
    members.push_back(Json{{"index", i},
                           {"seed", member_seed(c, i)},
                           {"stopping", to_json(r.stopping)},
                           {"steps_run", r.ledger.size() - 1},
                           {"lp_envelope", r.ledger.lp_envelope()},
                           {"l2_envelope", r.ledger.l2_envelope()}});
    mean_l2 += r.ledger.l2_envelope() / c.ensemble_size;
  }
  sink.write_json("snse_report.json", Json{{"members", members}, {"mean_l2_envelope", mean_l2}});
  return 0;
}

// ---------------------------------------------------------------------------
// converge-study

inline int run_converge(const ExperimentConfig& c, ArtifactSink& sink) {
  std::vector<CauchyStudy> studies(static_cast<std::size_t>(c.ensemble_size));
  parallel_for(c.ensemble_size, c.threads, [&](int i) {
    const auto cfg = c.snse_config(member_seed(c, i));
    const auto raw = member_initial(c, i);
    double M = 1.0;
    if (c.M) {
      M = *c.M;
    } else {
      // One threshold for every level: the largest quarter-bound M0.
      for (double n : c.n_list) {
        const double k = k_for_level(c.k_schedule, n, raw);
        M = std::max(M, quarter_bound_M0(prepare_initial_data(raw, n, k), c.p, c.K));
      }
    }
    studies[i] = cauchy_study(cfg, c.n_list, raw, c.k_schedule, MonitorSpec{M, c.K, true});
  });
  const std::size_t pairs = c.n_list.size() - 1;
  std::vector<double> mean_sup(pairs, 0.0), mean_int(pairs, 0.0);
  Json members = Json::array();
  for (int i = 0; i < c.ensemble_size; ++i) {
    const auto& st = studies[i];
    Json levels = Json::array(), reports = Json::array();
    for (std::size_t j = 0; j < st.levels.size(); ++j) {
      const auto& lv = st.levels[j];
      sink.write("converge_ledger_" + member_tag(i) + "_level" + std::to_string(j) + "_n" + level_tag(lv.n) + ".csv",
                 ledger_csv(lv.ledger));
      levels.push_back(Json{{"n", lv.n}, {"k", lv.k}, {"stopping", to_json(lv.stopping)}});
    }
    for (std::size_t j = 0; j < pairs; ++j) {
      reports.push_back(to_json(st.reports[j]));
      mean_sup[j] += st.reports[j].sup_dist_p / c.ensemble_size;
      mean_int[j] += st.reports[j].int_dist_3p / c.ensemble_size;
    }
    members.push_back(Json{{"index", i}, {"seed", member_seed(c, i)}, {"levels", levels}, {"reports", reports}});
  }
  Json ensemble = Json::array();
  bool decreasing = true;
  for (std::size_t j = 0; j < pairs; ++j) {
    ensemble.push_back(Json{{"pair", {c.n_list[j], c.n_list[j + 1]}},
                            {"mean_sup_dist_p", mean_sup[j]},
                            {"mean_int_dist_3p", mean_int[j]}});
    if (j > 0) decreasing = decreasing && mean_sup[j] < mean_sup[j - 1];
  }
  sink.write_json("converge_report.json", Json{{"members", members},
                                               {"ensemble", ensemble},
                                               {"mean_sup_dist_p_strictly_decreasing", decreasing}});
  return 0;
}

// ---------------------------------------------------------------------------
// uniqueness-check

inline int run_uniqueness(const ExperimentConfig& c, ArtifactSink& sink) {
  std::vector<UniquenessResult> res(static_cast<std::size_t>(c.ensemble_size));
  parallel_for(c.ensemble_size, c.threads, [&](int i) {
    const auto cfg = c.snse_config(member_seed(c, i));
    const auto raw = member_initial(c, i);
    double M = 1.0;
    if (c.M) {
      M = *c.M;
    } else {
      const auto prepared = c.initial.n_level ? prepare_initial_data(raw, *c.initial.n_level, cfg.k) : project_initial_data(raw, cfg.k);
      M = quarter_bound_M0(prepared, c.p, c.K);
    }
    res[i] = uniqueness_check(cfg, raw, c.initial.n_level, c.perturbation, MonitorSpec{M, c.K, true});
  });
  Json members = Json::array();
  double worst = 0.0;
  for (int i = 0; i < c.ensemble_size; ++i) {
    Json m = to_json(res[i]);
    m["index"] = i;
    m["seed"] = member_seed(c, i);
    members.push_back(std::move(m));
    worst = std::max(worst, res[i].max_deviation);
  }
  sink.write_json("uniqueness_report.json",
                  Json{{"perturbation", to_string(c.perturbation)}, {"max_deviation", worst}, {"members", members}});
  return 0;
}

// ---------------------------------------------------------------------------
// noise-audit

inline int run_noise_audit(const ExperimentConfig& c, ArtifactSink& sink) {
  const Grid g = c.grid();
  std::vector<RealVectorField> samples;
  for (int i = 0; i < c.audit_samples; ++i)
    samples.push_back(random_smooth_field(g, derive_seed(c.master_seed, static_cast<std::uint64_t>(i)), c.initial.max_mode,
                                          c.initial.rms * (0.5 + i), false));
  const auto rep = noise_audit(c.noise_model(), samples, c.p);
  Json j = to_json(rep);
  j["kind"] = std::string(to_string(c.noise.kind));
  j["growth_exponent_deficit"] = kGrowthExponentDeficit;
  sink.write_json("noise_audit.json", j);
  return rep.all_finite ? 0 : 1;
}

/// Dispatches one command; artifacts and the manifest go to `dir`.
inline int run_experiment(const ExperimentConfig& c, const std::string& dir) {
  ArtifactSink sink(dir);
  int status = 0;
  if (c.command == "verify-operators") status = run_verify_operators(c, sink);
  else if (c.command == "heat-run") status = run_heat(c, sink);
  else if (c.command == "snse-run") status = run_snse(c, sink);
  else if (c.command == "converge-study") status = run_converge(c, sink);
  else if (c.command == "uniqueness-check") status = run_uniqueness(c, sink);
  else status = run_noise_audit(c, sink);
  sink.finish(c);
  return status;
}

}  // namespace snse::cli
