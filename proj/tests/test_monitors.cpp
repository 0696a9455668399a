#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

using namespace snse;

namespace {

const double L = kDefaultBoxSide;
const double kNoStop = 1e30;

SnseConfig small_config() {
  SnseConfig c;
  c.grid = Grid::cube(3, 16, L);
  c.k = 8.0;
  c.N = 50.0;
  c.noise = NoiseModel::inverse_k(4, NoiseKind::linear_mollified, 2.0, 0);
  c.dt = 0.01;
  c.T = 0.1;
  c.seed = 21;
  return c;
}

/// Ledger whose functional sup lp_p + l3p_cum is exactly 2^i at row i.
EnergyLedger synthetic_ledger(std::size_t rows) {
  std::vector<LedgerRow> out;
  for (std::size_t i = 0; i < rows; ++i) {
    LedgerRow r;
    r.t = 0.1 * static_cast<double>(i);
    r.lp_p = std::ldexp(1.0, static_cast<int>(i));
    r.sup_lp_p = r.lp_p;
    out.push_back(r);
  }
  return EnergyLedger(4.0, std::move(out));
}

}  // namespace

TEST(Stopping, ZeroTrajectoryNeverTriggers) {
  EnergyLedger ledger(4.0);
  for (int i = 0; i <= 10; ++i) ledger.record(0.1 * i, EnergySample{});
  const auto rec = stopping_monitor(ledger, 1.0, 1.0, 4.0);
  EXPECT_FALSE(rec.triggered);
  EXPECT_TRUE(std::isinf(rec.tau));
}

TEST(Stopping, SyntheticCrossingDetectedExactly) {
  const auto ledger = synthetic_ledger(12);
  // Threshold M K^p = 3 * 2^4 = 48: first row with 2^i >= 48 is i = 6.
  const auto rec = stopping_monitor(ledger, 3.0, 2.0, 4.0);
  ASSERT_TRUE(rec.triggered);
  EXPECT_EQ(rec.step_index, 6u);
  EXPECT_DOUBLE_EQ(rec.tau, 0.6);
  EXPECT_EQ(rec.functional_at_tau, 64.0);
  // Equality counts as a crossing.
  EXPECT_EQ(stopping_monitor(ledger, 4.0, 2.0, 4.0).step_index, 6u);
}

TEST(Stopping, ThresholdMonotonicity) {
  const auto ledger = synthetic_ledger(20);
  double prev = 0.0;
  for (double M = 1.0; M < 1e5; M *= 1.7) {
    const auto rec = stopping_monitor(ledger, M, 1.0, 4.0);
    EXPECT_GE(rec.tau, prev);
    prev = rec.tau;
  }
  const auto hi = stopping_monitor(ledger, 1000.0, 1.0, 4.0);
  const auto lo = stopping_monitor(ledger, 500.0, 1.0, 4.0);
  EXPECT_LE(lo.tau, hi.tau);
}

TEST(Stopping, RejectsSmallParameters) {
  EXPECT_THROW(StoppingMonitor(0.5, 1.0, 4.0), PreconditionError);
  EXPECT_THROW(StoppingMonitor(1.0, 0.5, 4.0), PreconditionError);
}

TEST(Stopping, PositiveUnderQuarterBound) {
  const auto c = small_config();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto u0 = random_smooth_field(c.grid, 40 + seed, 3, 1.0);
    const auto prepared = prepare_initial_data(u0, 2.0, c.k);
    const double K = 1.0;
    const double M = quarter_bound_M0(prepared, c.p, K);
    const auto run = snse_solve(c, u0, 2.0, MonitorSpec{M, K});
    EXPECT_TRUE(run.stopping.quarter_bound_ok);
    EXPECT_GT(run.stopping.tau, 0.0);
  }
}

TEST(SobolevRatio, ZeroField) { EXPECT_EQ(sobolev_ratio(RealVectorField(Grid::cube(3, 8, L)), 4.0), 0.0); }

TEST(SobolevRatio, NonzeroMeanRejected) {
  const Grid g = Grid::cube(3, 8, L);
  RealVectorField c(g);
  for (auto& v : c.component(0)) v = 1.0;
  EXPECT_THROW(sobolev_ratio(c, 4.0), PreconditionError);
}

TEST(SobolevRatio, Homogeneous) {
  const Grid g = Grid::cube(3, 16, L);
  const auto v = random_smooth_field(g, 3, 3, 1.0);
  const double r = sobolev_ratio(v, 4.0);
  for (double lam : {0.1, 3.0, 250.0}) EXPECT_NEAR(sobolev_ratio(lam * v, 4.0), r, 1e-12 * r);
}

TEST(SobolevRatio, StableUnderRefinement) {
  std::vector<double> r;
  for (int n : {16, 32, 64}) r.push_back(sobolev_ratio(test::sine_mode(Grid::cube(3, n, L), {1, 1, 0}), 4.0));
  EXPECT_TRUE(std::isfinite(r[0]));
  EXPECT_NEAR(r[1], r[2], 0.05 * r[2]);
}

TEST(Cauchy, DuplicatedLevelsGiveZeroDistance) {
  const auto c = small_config();
  const auto u0 = random_smooth_field(c.grid, 50, 3, 1.0);
  const auto study = cauchy_study(c, {4.0, 4.0}, u0, KSchedule::identity, MonitorSpec{kNoStop, 1.0});
  ASSERT_EQ(study.reports.size(), 1u);
  EXPECT_EQ(study.reports[0].sup_dist_p, 0.0);
  EXPECT_EQ(study.reports[0].int_dist_3p, 0.0);
  EXPECT_DOUBLE_EQ(study.reports[0].horizon, c.T);
}

TEST(Cauchy, SymmetricInThePair) {
  const auto c = small_config();
  const auto u0 = random_smooth_field(c.grid, 51, 3, 1.0);
  const auto fwd = cauchy_study(c, {2.0, 4.0}, u0, KSchedule::identity, MonitorSpec{kNoStop, 1.0});
  const auto rev = cauchy_study(c, {4.0, 2.0}, u0, KSchedule::identity, MonitorSpec{kNoStop, 1.0});
  EXPECT_GT(fwd.reports[0].sup_dist_p, 0.0);
  EXPECT_EQ(fwd.reports[0].sup_dist_p, rev.reports[0].sup_dist_p);
  EXPECT_EQ(fwd.reports[0].int_dist_3p, rev.reports[0].int_dist_3p);
}

TEST(Cauchy, DeterministicBandLimitedCompactDataGivesZero) {
  auto c = small_config();
  c.noise_enabled = false;
  c.nonlinear_enabled = false;
  // Smooth bump inside the plateau radius of every level; on this grid the
  // projector levels 2..8 act as the identity to double precision.
  const Grid& g = c.grid;
  RealVectorField u0(g);
  for_each_point(g, [&](std::size_t idx, int i0, int i1, int i2) {
    const std::array<int, 3> i{i0, i1, i2};
    double r2 = 0.0;
    for (int a = 0; a < 3; ++a) r2 += std::pow(g.coordinate(a, i[a]) - 0.5 * L, 2);
    u0.component(2)[idx] = std::exp(-r2);  // radial in (x, y, z), negligible beyond r = 4
  });
  const auto study = cauchy_study(c, {2.0, 4.0, 8.0}, u0, KSchedule::identity, MonitorSpec{kNoStop, 1.0});
  for (const auto& r : study.reports) EXPECT_LT(r.sup_dist_p, 1e-24) << r.n << " " << r.m;
}

TEST(Cauchy, WindowClosesAtFirstStop) {
  const auto c = small_config();
  const auto u0 = random_smooth_field(c.grid, 52, 3, 2.0);
  // Small threshold: the run stops early and the window horizon follows it.
  const auto study = cauchy_study(c, {2.0, 4.0}, u0, KSchedule::identity, MonitorSpec{1.0, 1.0});
  const auto& r = study.reports[0];
  EXPECT_EQ(r.horizon, std::min({r.tau_n, r.tau_m, c.T}));
  EXPECT_GE(r.sup_dist_p, 0.0);
  EXPECT_GE(r.int_dist_3p, 0.0);
  EXPECT_EQ(study.levels.size(), 2u);
  EXPECT_THROW(cauchy_study(c, {2.0}, u0, KSchedule::identity, MonitorSpec{}), PreconditionError);
}

TEST(Uniqueness, IdenticalRunsCoincide) {
  const auto c = small_config();
  const auto u0 = random_smooth_field(c.grid, 60, 3, 1.0);
  const auto r = uniqueness_check(c, u0, 2.0, Perturbation::none, MonitorSpec{kNoStop, 1.0});
  EXPECT_LE(r.max_deviation, 1e-12);
  EXPECT_EQ(r.deviations.size(), c.steps() + 1);
  EXPECT_DOUBLE_EQ(r.horizon, c.T);
}

TEST(Uniqueness, TinyPerturbationStaysSmall) {
  const auto c = small_config();
  const auto u0 = random_smooth_field(c.grid, 61, 3, 1.0);
  const auto r = uniqueness_check(c, u0, 2.0, Perturbation::tiny, MonitorSpec{kNoStop, 1.0});
  EXPECT_GT(r.initial_deviation, 0.0);
  EXPECT_TRUE(std::isfinite(r.final_deviation));
  EXPECT_LT(r.relative_deviation, 1e-8);
}

TEST(Uniqueness, DifferentSeedsSeparate) {
  auto c = small_config();
  c.noise.kind = NoiseKind::linear_mollified;
  const auto u0 = random_smooth_field(c.grid, 62, 3, 1.0);
  const auto r = uniqueness_check(c, u0, std::nullopt, Perturbation::different_seed, MonitorSpec{kNoStop, 1.0});
  EXPECT_EQ(r.initial_deviation, 0.0);
  EXPECT_GT(r.relative_deviation, 1e-3);
}
