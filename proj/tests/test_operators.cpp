#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "test_support.hpp"

using namespace snse;
using snse::test::max_abs_diff;
using snse::test::white_noise;

namespace {

const double L = kDefaultBoxSide;

double relative_diff(const RealVectorField& a, const RealVectorField& b) {
  return max_abs_diff(a, b) / std::max(max_norm(b), 1e-300);
}

}  // namespace

TEST(GaussianProjector, PreservesConstants) {
  const Grid g = Grid::cube(3, 8, L);
  RealVectorField f(g);
  for (int j = 0; j < 3; ++j)
    for (auto& v : f.component(j)) v = 1.5 + j;
  for (double n : {0.25, 1.0, 8.0}) {
    EXPECT_LT(max_abs_diff(gaussian_projector(f, n), f), 1e-13);
    EXPECT_LT(max_abs_diff(gaussian_projector_direct(f, n), f), 1e-13);
  }
}

TEST(GaussianProjector, SingleModeOnUnitBox) {
  const Grid g = Grid::cube(3, 16, 1.0);
  const auto f = test::sine_mode(g, {1, 0, 0}, 2.0);
  const auto Pf = gaussian_projector(f, 1.0);
  EXPECT_LT(max_abs_diff(Pf, std::exp(-1.0) * f), 1e-14);
}

TEST(GaussianProjector, MatchesDirectConvolution) {
  for (int n_grid : {8, 16}) {
    const Grid g = Grid::cube(3, n_grid, L);
    for (double n : {0.5, 1.0, 2.0}) {
      const auto f = white_noise(g, 17 + n_grid);
      EXPECT_LT(relative_diff(gaussian_projector(f, n), gaussian_projector_direct(f, n)), 1e-10)
          << "grid " << n_grid << " n " << n;
    }
  }
}

TEST(GaussianProjector, DirectOfDeltaIsKernel) {
  // One-hot sample of height 1/dv is a discrete delta: the output is the
  // lattice kernel, which must be positive, symmetric and of unit mass.
  const Grid g({16, 16}, {4.0, 4.0});
  RealVectorField f(g);
  f.component(0)[0] = 1.0 / g.volume_element();
  const auto K = gaussian_projector_direct(f, 1.0);
  double mass = 0.0;
  for (std::size_t i = 0; i < g.points(); ++i) {
    EXPECT_GT(K.component(0)[i], 0.0);
    mass += K.component(0)[i] * g.volume_element();
  }
  EXPECT_NEAR(mass, 1.0, 1e-13);
  EXPECT_NEAR(K.component(0)[g.index(3, 5, 0)], K.component(0)[g.index(13, 11, 0)], 1e-15 * max_norm(K));
  // Ratio of neighbouring samples of pi n^2 exp(-pi^2 n^2 |x|^2), h = 1/4.
  EXPECT_NEAR(K.component(0)[g.index(1, 0, 0)] / K.component(0)[0], std::exp(-std::numbers::pi * std::numbers::pi / 16.0), 1e-12);
}

TEST(GaussianProjector, DirectRejectsLargeGrids) {
  const Grid g = Grid::cube(3, 64, L);
  EXPECT_THROW(gaussian_projector_direct(RealVectorField(g), 1.0), PreconditionError);
}

TEST(GaussianProjector, RejectsNonPositiveLevel) {
  const Grid g = Grid::cube(2, 8, L);
  EXPECT_THROW(gaussian_projector(RealVectorField(g), 0.0), PreconditionError);
  EXPECT_THROW(gaussian_projector(RealVectorField(g), -1.0), PreconditionError);
}

TEST(GaussianProjector, SymbolIsPositiveAndBoundedByOne) {
  const Grid g({16, 12, 8}, {L, 2.0, 0.5});
  for (double n : {0.01, 0.3, 1.0, 50.0})
    for (double s : gaussian_symbol(g, n)) {
      EXPECT_GE(s, 0.0);  // may underflow to 0 at tiny n
      EXPECT_LE(s, 1.0 + 1e-13);
    }
}

TEST(GaussianProjector, ContractionInLq) {
  const Grid g = Grid::cube(3, 16, L);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto f = white_noise(g, seed);
    for (double q : {1.0, 2.0, 4.0, 6.0})
      for (double n : {1.0, 2.0, 8.0}) ASSERT_LE(lp_norm(gaussian_projector(f, n), q), (1 + 1e-10) * lp_norm(f, q));
  }
}

TEST(GaussianProjector, ConvergesToIdentity) {
  // Unit box so that exp(-|xi/n|^2) is resolved by the lattice for every n.
  const Grid g = Grid::cube(3, 32, 1.0);
  const auto f = random_smooth_field(g, 3, 3, 1.0, false);
  double prev = std::numeric_limits<double>::infinity();
  std::vector<double> dist;
  for (double n : {1.0, 2.0, 4.0, 8.0, 16.0}) {
    const double d = lp_norm(gaussian_projector(f, n) - f, 4.0);
    EXPECT_LT(d, prev) << "n " << n;
    prev = d;
    dist.push_back(d);
  }
  // For band-limited f the distance decays like 1/n^2, faster than the 1/n bound.
  EXPECT_GT(std::log2(dist[3] / dist[4]), 1.0);
}

TEST(GaussianProjector, LipschitzInInverseLevel) {
  for (int d : {2, 3}) {
    const double C = test::gaussian_first_moment(d);
    const double exact = d == 3 ? 2.0 / std::pow(std::numbers::pi, 1.5) : 1.0 / (2.0 * std::sqrt(std::numbers::pi));
    ASSERT_NEAR(C, exact, 1e-10);
    const Grid g = Grid::cube(d, d == 3 ? 32 : 64, L);
    const auto f = random_smooth_field(g, 40 + d, 4, 1.0, false);
    for (double q : {2.0, 4.0}) {
      const double grad = gradient_lp_norm(f, q);
      for (auto [n, m] : {std::pair{2.0, 4.0}, {4.0, 8.0}, {8.0, 16.0}}) {
        const double lhs = lp_norm(gaussian_projector(f, n) - gaussian_projector(f, m), q);
        EXPECT_LE(lhs, C * std::abs(1.0 / n - 1.0 / m) * grad) << "d " << d << " q " << q << " n " << n;
      }
    }
  }
}

TEST(GaussianProjector, SequenceFieldContractionAndAgreement) {
  const Grid g = Grid::cube(3, 8, L);
  std::vector<RealVectorField> modes;
  for (int k = 0; k < 4; ++k) modes.push_back(white_noise(g, 200 + k, 1.0 / (k + 1)));
  const LtwoSequenceField G(g, modes);
  for (double n : {0.5, 2.0}) {
    const auto PG = gaussian_projector(G, n);
    const auto PGd = gaussian_projector_direct(G, n);
    for (int k = 0; k < G.modes(); ++k) EXPECT_LT(relative_diff(PG.mode(k), PGd.mode(k)), 1e-10);
    for (double q : {2.0, 4.0}) EXPECT_LE(hs_lp_norm(PG, q), (1 + 1e-10) * hs_lp_norm(G, q));
  }
}

TEST(GaussianProjector, SequenceFieldLipschitz) {
  const Grid g = Grid::cube(3, 32, L);
  std::vector<RealVectorField> modes;
  for (int k = 0; k < 3; ++k) modes.push_back(random_smooth_field(g, 300 + k, 3, 1.0 / (k + 1), false));
  const LtwoSequenceField G(g, modes);
  const double C = test::gaussian_first_moment(3);
  // l2-valued gradient norm: pointwise sqrt(sum_k |D G_k|_F^2), then L^q.
  std::vector<double> sq(g.points(), 0.0);
  for (const auto& m : modes) {
    const auto F = forward_transform(m);
    for (int j = 0; j < 3; ++j)
      for (int a = 0; a < 3; ++a) {
        const auto d = inverse_scalar(g, spectral_derivative(g, F.component(j), a));
        for (std::size_t i = 0; i < sq.size(); ++i) sq[i] += d[i] * d[i];
      }
  }
  for (auto& v : sq) v = std::sqrt(v);
  const double grad = lp_norm(g, sq, 4.0);
  const auto P2 = gaussian_projector(G, 2.0), P4 = gaussian_projector(G, 4.0);
  std::vector<RealVectorField> diff;
  for (int k = 0; k < G.modes(); ++k) diff.push_back(P2.mode(k) - P4.mode(k));
  EXPECT_LE(hs_lp_norm(LtwoSequenceField(g, diff), 4.0), C * 0.25 * grad);
}

TEST(Leray, AnnihilatesGradients) {
  const Grid g = Grid::cube(3, 16, L);
  // grad sin(2 pi x/L) = (2 pi/L) cos(2 pi x/L) e_1
  RealVectorField f(g);
  const double k = kTwoPi / L;
  for_each_point(g, [&](std::size_t idx, int i0, int, int) { f.component(0)[idx] = k * std::cos(k * g.coordinate(0, i0)); });
  EXPECT_LT(max_norm(leray_project(f)), 1e-12 * max_norm(f));
}

TEST(Leray, AnnihilatesRandomGradients) {
  const Grid g = Grid::cube(3, 16, L);
  const auto phi = white_noise(g, 8);
  const auto Phi = forward_transform(phi);
  SpectralVectorField grad(g);
  for (int a = 0; a < 3; ++a) {
    const auto d = spectral_derivative(g, Phi.component(0), a);
    std::copy(d.begin(), d.end(), grad.component(a).begin());
  }
  const auto G = inverse_transform(grad);
  EXPECT_LT(lp_norm(leray_project(G), 2.0), 1e-12 * lp_norm(G, 2.0));
}

TEST(Leray, FixesDivergenceFreeFields) {
  const Grid g = Grid::cube(3, 16, L);
  const auto f = test::sine_mode(g, {1, 0, 0}, 1.0, 1);
  EXPECT_LT(max_abs_diff(leray_project(f), f), 1e-13);
  const auto tg = taylor_green(g, 1.0);
  EXPECT_LT(max_abs_diff(leray_project(tg), tg), 1e-13);
}

TEST(Leray, IdempotentAndDivergenceFree) {
  const Grid g = Grid::cube(3, 16, L);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto f = white_noise(g, seed);
    const auto Pf = leray_project(f);
    EXPECT_LE(lp_norm(leray_project(Pf) - Pf, 2.0), 1e-12 * lp_norm(f, 2.0));
    EXPECT_LE(spectral_divergence_max(Pf), 1e-10 * lp_norm(f, 2.0));
  }
}

TEST(Leray, PreservesMean) {
  const Grid g = Grid::cube(3, 8, L);
  auto f = white_noise(g, 5);
  const auto F = forward_transform(f);
  const auto PF = leray_project(F);
  for (int j = 0; j < 3; ++j) EXPECT_EQ(PF.component(j)[0], F.component(j)[0]);
}

TEST(Leray, CommutesWithGaussianProjector) {
  const Grid g = Grid::cube(3, 16, L);
  const auto f = white_noise(g, 9);
  EXPECT_LT(relative_diff(leray_project(gaussian_projector(f, 1.0)), gaussian_projector(leray_project(f), 1.0)), 1e-12);
}

TEST(Leray, TwoDimensional) {
  const Grid g = Grid::cube(2, 32, L);
  const auto Pf = leray_project(white_noise(g, 21));
  EXPECT_LT(spectral_divergence_max(Pf), 1e-10 * lp_norm(Pf, 2.0));
}

TEST(Bessel, ZeroOrderIsIdentity) {
  const Grid g = Grid::cube(3, 8, L);
  const auto f = white_noise(g, 1);
  EXPECT_LT(max_abs_diff(bessel_potential(f, 0.0), f), 1e-13);
}

TEST(Bessel, SingleModeScaling) {
  const Grid g = Grid::cube(3, 16, L);
  const auto f = test::sine_mode(g, {2, 1, 0});
  const double xi2 = (4.0 + 1.0) / (L * L);
  const double factor = 1.0 + 4.0 * std::numbers::pi * std::numbers::pi * xi2;
  EXPECT_LT(max_abs_diff(bessel_potential(f, 2.0), factor * f), 1e-12 * factor);
}

TEST(Bessel, InverseComposition) {
  const Grid g = Grid::cube(3, 16, L);
  const auto f = white_noise(g, 2);
  EXPECT_LT(relative_diff(bessel_potential(bessel_potential(f, -2.0), 2.0), f), 1e-12);
}

TEST(Mollifier, PreservesConstants) {
  const Grid g = Grid::cube(3, 16, L);
  RealVectorField f(g);
  for (auto& v : f.component(0)) v = -2.0;
  EXPECT_LT(max_abs_diff(mollify(f, 2.0), f), 1e-13);
}

TEST(Mollifier, ContractionInLq) {
  const Grid g = Grid::cube(3, 16, L);
  const auto f = white_noise(g, 12);
  for (double eps : {1.0, 3.0, 8.0})
    for (double q : {1.0, 2.0, 4.0}) EXPECT_LE(lp_norm(mollify(f, eps), q), (1 + 1e-12) * lp_norm(f, q));
}

TEST(Mollifier, StepFieldRefinement) {
  const Grid g({256, 4}, {L, L});
  RealVectorField f(g);
  for_each_point(g, [&](std::size_t idx, int i0, int, int) { f.component(0)[idx] = g.coordinate(0, i0) < 0.5 * L ? 1.0 : -1.0; });
  double prev = std::numeric_limits<double>::infinity();
  for (double eps : {L / 8, L / 16, L / 32}) {
    const double d = lp_norm(mollify(f, eps) - f, 2.0);
    EXPECT_LT(d, prev);
    prev = d;
  }
}

TEST(Mollifier, SecondOrderOnSmoothModes) {
  const Grid g({1024, 4}, {L, L});
  const auto f = test::sine_mode(g, {1, 0, 0});
  std::vector<double> change;
  for (double eps : {L / 16, L / 32, L / 64}) change.push_back(lp_norm(mollify(f, eps) - f, 2.0) / lp_norm(f, 2.0));
  EXPECT_NEAR(std::log2(change[0] / change[1]), 2.0, 0.05);
  EXPECT_NEAR(std::log2(change[1] / change[2]), 2.0, 0.05);
}

TEST(Mollifier, RejectsBadWidth) {
  const Grid g = Grid::cube(3, 8, L);
  EXPECT_THROW(Mollifier(g, 0.0), PreconditionError);
  EXPECT_THROW(Mollifier(g, 0.6 * L), PreconditionError);
}

TEST(Cutoff, PlateausAndMidpoint) {
  for (double N : {0.5, 1.0, 3.0}) {
    const CutoffSpec spec{N};
    EXPECT_EQ(cutoff_phi(0.0, spec), 1.0);
    EXPECT_EQ(cutoff_phi(2.0 * N, spec), 1.0);
    EXPECT_EQ(cutoff_phi(4.0 * N, spec), 0.0);
    EXPECT_EQ(cutoff_phi(5.0 * N, spec), 0.0);
    EXPECT_NEAR(cutoff_phi(3.0 * N, spec), 0.5, 1e-15);
  }
}

TEST(Cutoff, MonotoneAndLipschitz) {
  const CutoffSpec spec{2.0};
  const double lip = spec.lipschitz_constant();
  EXPECT_DOUBLE_EQ(lip, 15.0 / 32.0);
  double prev = 1.0, worst = 0.0;
  const double h = 1e-4;
  for (double t = 0.0; t <= 10.0; t += h) {
    const double v = cutoff_phi(t, spec);
    EXPECT_LE(v, prev);
    worst = std::max(worst, (prev - v) / h);
    prev = v;
  }
  EXPECT_LE(worst, lip * (1 + 1e-6));
  EXPECT_GE(worst, lip * (1 - 1e-3));
}

TEST(Cutoff, RejectsBadArguments) {
  EXPECT_THROW(cutoff_phi(1.0, CutoffSpec{0.0}), PreconditionError);
  EXPECT_THROW(cutoff_phi(-1.0, CutoffSpec{1.0}), PreconditionError);
}
