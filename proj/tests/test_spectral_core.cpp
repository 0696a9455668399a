#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "test_support.hpp"

using namespace snse;
using snse::test::max_abs_diff;
using snse::test::white_noise;

namespace {

const double L = kDefaultBoxSide;

}  // namespace

TEST(Grid, RejectsBadShapes) {
  EXPECT_THROW(Grid({8}, {L}), PreconditionError);
  EXPECT_THROW(Grid({8, 8}, {L}), PreconditionError);
  EXPECT_THROW(Grid({0, 8}, {L, L}), PreconditionError);
  EXPECT_THROW(Grid({8, 8}, {L, -1.0}), PreconditionError);
  EXPECT_NO_THROW(Grid({8, 6, 4}, {1.0, 2.0, 3.0}));
}

TEST(Grid, FrequencyLayout) {
  const Grid g({8, 8}, {2.0, 2.0});
  EXPECT_EQ(g.integer_frequency(0, 0), 0);
  EXPECT_EQ(g.integer_frequency(0, 3), 3);
  EXPECT_EQ(g.integer_frequency(0, 5), -3);
  EXPECT_TRUE(g.is_nyquist(0, 4));
  EXPECT_DOUBLE_EQ(g.frequency(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(g.volume(), 4.0);
}

TEST(Transform, ConstantMapsToVolumeTimesValueAtZero) {
  const Grid g = Grid::cube(3, 8, L);
  RealVectorField f(g);
  for (auto& v : f.component(1)) v = 2.5;
  const auto F = forward_transform(f);
  EXPECT_NEAR(F.component(1)[0].real(), 2.5 * g.volume(), 1e-9 * g.volume());
  for (std::size_t i = 1; i < g.points(); ++i) EXPECT_LT(std::abs(F.component(1)[i]), 1e-9 * g.volume());
}

TEST(Transform, SineModeGivesConjugatePair) {
  const Grid g = Grid::cube(3, 8, L);
  const auto f = test::sine_mode(g, {1, 0, 0});
  const auto F = forward_transform(f);
  // int sin(2 pi x/L) e^{-2 pi i x/L} = V/(2i)
  const std::size_t plus = g.index(1, 0, 0), minus = g.index(7, 0, 0);
  const double V = g.volume();
  EXPECT_NEAR(F.component(0)[plus].imag(), -0.5 * V, 1e-10 * V);
  EXPECT_NEAR(F.component(0)[minus].imag(), 0.5 * V, 1e-10 * V);
  EXPECT_NEAR(F.component(0)[plus].real(), 0.0, 1e-10 * V);
  double rest = 0.0;
  for (std::size_t i = 0; i < g.points(); ++i)
    if (i != plus && i != minus) rest = std::max(rest, std::abs(F.component(0)[i]));
  EXPECT_LT(rest, 1e-10 * V);
}

TEST(Transform, RoundTripOnRandomFields) {
  for (int d : {2, 3}) {
    const Grid g = Grid::cube(d, d == 3 ? 16 : 32, L);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto f = white_noise(g, seed);
      const auto back = inverse_transform(forward_transform(f));
      ASSERT_LT(max_abs_diff(f, back), 1e-12 * std::max(1.0, max_norm(f))) << "seed " << seed;
    }
  }
}

TEST(Transform, NonCubicGridRoundTrip) {
  const Grid g({8, 12, 6}, {1.0, 3.0, 2.0});
  const auto f = white_noise(g, 4);
  EXPECT_LT(max_abs_diff(f, inverse_transform(forward_transform(f))), 1e-12);
}

TEST(Transform, Parseval) {
  const Grid g = Grid::cube(3, 16, L);
  const auto f = white_noise(g, 11);
  const double direct = lp_norm(f, 2.0);
  EXPECT_NEAR(l2_norm_from_spectrum(forward_transform(f)), direct, 1e-12 * direct);
}

TEST(Multiplier, OneIsIdentity) {
  const Grid g = Grid::cube(3, 8, L);
  const auto f = white_noise(g, 2);
  const auto out = inverse_transform(apply_multiplier(forward_transform(f), [](const WaveVector&) { return 1.0; }));
  EXPECT_LT(max_abs_diff(f, out), 1e-13);
}

TEST(Multiplier, CompositionIsProductOfSymbols) {
  const Grid g = Grid::cube(3, 16, L);
  const auto f = white_noise(g, 3);
  auto m1 = [](const WaveVector& k) { return std::exp(-k.norm2()); };
  auto m2 = [](const WaveVector& k) { return 1.0 / (1.0 + k.norm2()); };
  const auto F = forward_transform(f);
  const auto seq = inverse_transform(apply_multiplier(forward_transform(inverse_transform(apply_multiplier(F, m1))), m2));
  const auto joint = inverse_transform(apply_multiplier(F, [&](const WaveVector& k) { return m1(k) * m2(k); }));
  EXPECT_LT(max_abs_diff(seq, joint), 1e-12);
}

TEST(Multiplier, NonFiniteSymbolRejected) {
  const Grid g = Grid::cube(2, 8, L);
  auto F = forward_transform(white_noise(g, 1));
  EXPECT_THROW(apply_multiplier_inplace(F, [](const WaveVector& k) { return 1.0 / k.norm2(); }), PreconditionError);
}

TEST(Multiplier, DimensionMismatchRejected) {
  const auto a = white_noise(Grid::cube(3, 8, L), 1);
  const auto b = white_noise(Grid::cube(3, 16, L), 1);
  EXPECT_THROW(a - b, PreconditionError);
}

TEST(Multiplier, FiniteDifferenceSymbolMatchesStencil) {
  // The second-order centered difference is itself the multiplier
  // i sin(2 pi xi h) / h; both paths agree to roundoff.
  const Grid g = Grid::cube(3, 16, L);
  const auto f = test::TrigPolynomial::random(3, 3, 5).sample(g);
  for (int axis = 0; axis < 3; ++axis) {
    const double h = g.spacing(axis);
    const auto F = forward_transform(f);
    const auto via_symbol = inverse_transform(apply_multiplier(
        F, [&](const WaveVector& k) { return Complex(0.0, std::sin(kTwoPi * k.xi[axis] * h) / h); }));
    const auto via_stencil = gradient_fd(g, f.component(0), axis);
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < g.points(); ++i) {
      err = std::max(err, std::abs(via_symbol.component(0)[i] - via_stencil[i]));
      scale = std::max(scale, std::abs(via_stencil[i]));
    }
    EXPECT_LT(err, 1e-10 * scale) << "axis " << axis;
  }
}

TEST(Multiplier, SpectralDerivativeIsExactOnModes) {
  const Grid g = Grid::cube(3, 16, L);
  const auto f = test::sine_mode(g, {2, 1, 0});
  const auto d0 = inverse_scalar(g, spectral_derivative(g, forward_transform(f).component(0), 0));
  const double kx = kTwoPi * 2 / L, ky = kTwoPi / L;
  double err = 0.0;
  for_each_point(g, [&](std::size_t idx, int i0, int i1, int) {
    const double phase = kx * g.coordinate(0, i0) + ky * g.coordinate(1, i1);
    err = std::max(err, std::abs(d0[idx] - kx * std::cos(phase)));
  });
  EXPECT_LT(err, 1e-12);
}

TEST(Multiplier, LaplacianOfMode) {
  const Grid g = Grid::cube(3, 8, L);
  const auto f = test::sine_mode(g, {1, 1, 1});
  auto lap = laplacian(f);
  const double k2 = 3.0 * std::pow(kTwoPi / L, 2);
  lap += k2 * f;
  EXPECT_LT(max_norm(lap), 1e-12);
}

TEST(Norms, ConstantField) {
  const Grid g = Grid::cube(3, 8, L);
  RealVectorField f(g);
  for (auto& v : f.component(2)) v = 3.0;
  for (double p : {1.0, 2.0, 4.0, 7.5}) EXPECT_NEAR(lp_norm(f, p), 3.0 * std::pow(g.volume(), 1.0 / p), 1e-12 * lp_norm(f, p));
  EXPECT_DOUBLE_EQ(lp_norm(f, std::numeric_limits<double>::infinity()), 3.0);
}

TEST(Norms, SineL2) {
  const Grid g = Grid::cube(3, 8, L);
  const auto f = test::sine_mode(g, {1, 0, 0});
  EXPECT_NEAR(lp_norm(f, 2.0), std::sqrt(g.volume() / 2.0), 1e-12 * std::sqrt(g.volume()));
}

TEST(Norms, QuarticNormExactForBandLimitedFields) {
  // |f|^4 of a degree-1 trigonometric polynomial has degree 4 < 10, so the
  // rectangle rule is already exact at 10 points per axis.
  const auto poly = test::TrigPolynomial::random(3, 1, 9);
  const double coarse = lp_norm(poly.sample(Grid::cube(3, 10, L)), 4.0);
  const double fine = lp_norm(poly.sample(Grid::cube(3, 32, L)), 4.0);
  EXPECT_NEAR(coarse, fine, 1e-12 * fine);
}

TEST(Norms, RejectsSubunitExponent) {
  const Grid g = Grid::cube(2, 8, L);
  EXPECT_THROW(lp_norm(RealVectorField(g), 0.5), PreconditionError);
}

TEST(Norms, HilbertSchmidtSingleModeEqualsLp) {
  const Grid g = Grid::cube(3, 8, L);
  const auto f = white_noise(g, 6);
  const LtwoSequenceField G(g, std::vector<RealVectorField>{f});
  EXPECT_EQ(hs_lp_norm(G, 4.0), lp_norm(f, 4.0));
}

TEST(Norms, HilbertSchmidtDuplicatedModeScalesBySqrtTwo) {
  const Grid g = Grid::cube(3, 8, L);
  const auto f = white_noise(g, 7);
  const LtwoSequenceField G(g, std::vector<RealVectorField>{f, f});
  EXPECT_NEAR(hs_lp_norm(G, 4.0), std::sqrt(2.0) * lp_norm(f, 4.0), 1e-12 * lp_norm(f, 4.0));
}

TEST(Norms, HilbertSchmidtMatchesBruteForce) {
  const Grid g = Grid::cube(3, 8, L);
  std::vector<RealVectorField> modes;
  for (int k = 0; k < 8; ++k) modes.push_back(white_noise(g, 100 + k));
  const LtwoSequenceField G(g, modes);
  for (double p : {2.0, 3.0, 4.0}) {
    const double want = test::brute_force_hs_norm(modes, p);
    EXPECT_NEAR(hs_lp_norm(G, p), want, 1e-12 * want);
  }
}

TEST(Norms, MixedGridSequenceRejected) {
  std::vector<RealVectorField> modes{RealVectorField(Grid::cube(3, 8, L)), RealVectorField(Grid::cube(3, 4, L))};
  EXPECT_THROW(LtwoSequenceField(Grid::cube(3, 8, L), modes), PreconditionError);
}

TEST(FiniteDifference, ConstantHasZeroGradient) {
  const Grid g = Grid::cube(3, 8, L);
  std::vector<double> c(g.points(), 4.0);
  for (int order : {2, 4, 6})
    for (double v : gradient_fd(g, c, 1, order)) EXPECT_EQ(v, 0.0);
}

TEST(FiniteDifference, ConvergesAtDesignOrder) {
  for (int order : {2, 4, 6}) {
    double prev = 0.0;
    for (int n : {16, 32, 64}) {
      const Grid g({n, n}, {L, L});
      const auto f = test::sine_mode(g, {1, 0, 0});
      const auto d = gradient_fd(g, f.component(0), 0, order);
      const double k = kTwoPi / L;
      double err = 0.0;
      for_each_point(g, [&](std::size_t idx, int i0, int, int) {
        err = std::max(err, std::abs(d[idx] - k * std::cos(k * g.coordinate(0, i0))));
      });
      if (prev > 0.0) {
        EXPECT_NEAR(std::log2(prev / err), order, 0.1) << "order " << order << " n " << n;
      }
      prev = err;
    }
  }
}

TEST(FiniteDifference, RootOfSineIsFinite) {
  const Grid g = Grid::cube(3, 16, L);
  const auto f = test::sine_mode(g, {1, 0, 0});
  std::vector<double> w(g.points());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::pow(std::abs(f.component(0)[i]), 2.0);
  for (double v : gradient_fd(g, w, 0)) EXPECT_TRUE(std::isfinite(v));
}

TEST(FiniteDifference, BadOrderRejected) {
  const Grid g = Grid::cube(2, 8, L);
  std::vector<double> c(g.points(), 1.0);
  EXPECT_THROW(gradient_fd(g, c, 0, 3), PreconditionError);
  EXPECT_THROW(gradient_fd(g, c, 2), PreconditionError);
}
