#pragma once

// Truncated cylindrical Wiener process and the multiplicative noise
// coefficient sigma(u), plus an empirical audit of its growth, Lipschitz,
// gradient and L^2 bounds.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "snse/error.hpp"
#include "snse/fields.hpp"
#include "snse/operators.hpp"
#include "snse/spectral.hpp"

namespace snse {

enum class NoiseKind { linear_mollified, three_halves_mollified };

inline std::string_view to_string(NoiseKind k) {
  return k == NoiseKind::linear_mollified ? "linear_mollified" : "three_halves_mollified";
}

inline NoiseKind noise_kind_from_string(std::string_view s) {
  if (s == "linear_mollified") return NoiseKind::linear_mollified;
  if (s == "three_halves_mollified") return NoiseKind::three_halves_mollified;
  throw PreconditionError("unknown noise kind '" + std::string(s) + "'");
}

struct NoiseModel {
  int K = 16;
  std::vector<double> weights;  // a_k, k = 1..K
  NoiseKind kind = NoiseKind::linear_mollified;
  double mollifier_eps = 1.0;
  std::uint64_t rng_seed = 0;

  /// a_k = 1/k.
  static NoiseModel inverse_k(int K, NoiseKind kind, double eps, std::uint64_t seed) {
    require(K >= 1, "noise needs K >= 1 modes");
    NoiseModel m{K, {}, kind, eps, seed};
    for (int k = 1; k <= K; ++k) m.weights.push_back(1.0 / k);
    return m;
  }

  void validate() const {
    require(K >= 1, "noise needs K >= 1 modes");
    require(weights.size() == static_cast<std::size_t>(K), "noise weight count must equal K");
    for (std::size_t k = 0; k < weights.size(); ++k) {
      require(std::isfinite(weights[k]) && weights[k] > 0.0, "noise weights must be positive");
      if (k > 0) require(weights[k] <= weights[k - 1], "noise weights must be non-increasing");
    }
    require(mollifier_eps > 0.0, "noise mollifier width must be positive");
  }

  double weight_l2() const {
    double s = 0.0;
    for (double a : weights) s += a * a;
    return std::sqrt(s);
  }
};

struct WienerIncrement {
  std::vector<double> dW;
  int modes() const noexcept { return static_cast<int>(dW.size()); }
};

/// Independent substream seed for trajectory `index` of an ensemble.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0x5eedu};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

/// K independent N(0, dt) draws; a pure function of (seed, step, dt, K), so a
/// noise path can be replayed step by step (Picard iteration, coupled runs).
inline WienerIncrement wiener_increment(std::uint64_t seed, std::uint64_t step, double dt, int K) {
  require(dt > 0.0 && std::isfinite(dt), "Wiener increment needs dt > 0");
  require(K >= 1, "Wiener increment needs K >= 1");
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32)};
  std::mt19937_64 eng(seq);
  std::normal_distribution<double> normal(0.0, std::sqrt(dt));
  WienerIncrement w;
  w.dW.resize(static_cast<std::size_t>(K));
  for (auto& x : w.dW) x = normal(eng);
  return w;
}

/// sigma(u)_k = a_k * Leray(rho_eps * Phi(u)), Phi(u) = u or u |u|^{1/2}.
/// All modes share one spatial profile, so the map stores it once.
class SigmaMap {
 public:
  SigmaMap(NoiseModel model, const Grid& g) : model_(std::move(model)), mollifier_(g, model_.mollifier_eps) {
    model_.validate();
  }

  const NoiseModel& model() const noexcept { return model_; }
  const Grid& grid() const noexcept { return mollifier_.grid(); }

  RealVectorField nonlinearity(const RealVectorField& u) const {
    if (model_.kind == NoiseKind::linear_mollified) return u;
    RealVectorField out = u;
    for (std::size_t i = 0; i < u.points(); ++i) {
      const double s = std::sqrt(u.magnitude(i));
      for (int j = 0; j < u.components(); ++j) out.component(j)[i] *= s;
    }
    return out;
  }

  /// Spectrum of the shared profile Leray(rho_eps * Phi(u)).
  SpectralVectorField profile_spectrum(const RealVectorField& u) const {
    auto F = forward_transform(nonlinearity(u));
    mollifier_.apply_inplace(F);
    leray_project_inplace(F);
    return F;
  }

  LtwoSequenceField apply(const RealVectorField& u) const {
    const auto profile = inverse_transform(profile_spectrum(u));
    std::vector<RealVectorField> modes;
    modes.reserve(model_.weights.size());
    for (double a : model_.weights) modes.push_back(a * profile);
    return LtwoSequenceField(u.grid(), std::move(modes));
  }

  /// sum_k a_k dW_k: the scalar that multiplies the shared profile in a step.
  double weighted_increment(const WienerIncrement& w) const {
    require(w.modes() == model_.K, "Wiener increment has " + std::to_string(w.modes()) +
                                       " modes, noise model has " + std::to_string(model_.K));
    double s = 0.0;
    for (int k = 0; k < model_.K; ++k) s += model_.weights[k] * w.dW[k];
    return s;
  }

 private:
  NoiseModel model_;
  Mollifier mollifier_;
};

inline LtwoSequenceField sigma_apply(const NoiseModel& model, const RealVectorField& u) {
  return SigmaMap(model, u.grid()).apply(u);
}

// ---------------------------------------------------------------------------
// Audit

/// Exponent deficit standing in for the "(3p/2)-" norm of the growth bound.
inline constexpr double kGrowthExponentDeficit = 1e-2;

struct NoiseAuditReport {
  double growth = 0.0;     // ||sigma(u)||_{L^p} / (||u||_{3p/2-}^2 + 1)
  double lipschitz = 0.0;  // ||sigma(u1)-sigma(u2)||_{L^p} / ||(|u1|+|u2|)^{1/2}|u1-u2|||_p
  double gradient = 0.0;   // ||grad sigma(u)||_{L^p} / (||u||_{3p/2}^2 + 1)
  double l2 = 0.0;         // ||sigma(u)||_{L^2} / (||u||_2 + 1)
  bool all_finite = true;
  std::size_t samples = 0;
  std::size_t pairs = 0;
};

namespace detail {

inline double hs_gradient_lp_norm(const LtwoSequenceField& G, double p) {
  const Grid& g = G.grid();
  std::vector<double> sq(g.points(), 0.0);
  for (const auto& mode : G.all_modes()) {
    const auto F = forward_transform(mode);
    for (int j = 0; j < mode.components(); ++j)
      for (int a = 0; a < g.dim(); ++a) {
        const auto d = inverse_scalar(g, spectral_derivative(g, F.component(j), a));
        for (std::size_t i = 0; i < sq.size(); ++i) sq[i] += d[i] * d[i];
      }
  }
  for (auto& v : sq) v = std::sqrt(v);
  return lp_norm(g, sq, p);
}

inline void fold_ratio(double num, double den, double& best, bool& finite) {
  if (num == 0.0) return;
  const double r = num / den;
  if (!std::isfinite(r)) {
    finite = false;
    return;
  }
  best = std::max(best, r);
}

}  // namespace detail

/// Largest observed ratio for each noise bound over the samples (all pairs for
/// the Lipschitz bound). Non-finite ratios clear `all_finite`.
inline NoiseAuditReport noise_audit(const NoiseModel& model, const std::vector<RealVectorField>& samples, double p) {
  require(samples.size() >= 2, "noise audit needs at least two samples");
  require(p >= 1.0, "noise audit needs p >= 1");
  const SigmaMap sigma(model, samples.front().grid());
  const double r = 1.5 * p - kGrowthExponentDeficit;
  NoiseAuditReport rep;
  rep.samples = samples.size();
  std::vector<LtwoSequenceField> images;
  images.reserve(samples.size());
  for (const auto& u : samples) {
    require(u.grid() == sigma.grid(), "noise audit samples live on mixed grids");
    images.push_back(sigma.apply(u));
    const auto& s = images.back();
    const double lr = lp_norm(u, r), l32 = lp_norm(u, 1.5 * p);
    detail::fold_ratio(hs_lp_norm(s, p), lr * lr + 1.0, rep.growth, rep.all_finite);
    detail::fold_ratio(detail::hs_gradient_lp_norm(s, p), l32 * l32 + 1.0, rep.gradient, rep.all_finite);
    detail::fold_ratio(hs_lp_norm(s, 2.0), lp_norm(u, 2.0) + 1.0, rep.l2, rep.all_finite);
  }
  const Grid& g = sigma.grid();
  for (std::size_t a = 0; a < samples.size(); ++a)
    for (std::size_t b = a + 1; b < samples.size(); ++b) {
      ++rep.pairs;
      std::vector<RealVectorField> diff;
      for (int k = 0; k < model.K; ++k) diff.push_back(images[a].mode(k) - images[b].mode(k));
      const double num = hs_lp_norm(LtwoSequenceField(g, std::move(diff)), p);
      std::vector<double> weight(g.points());
      for (std::size_t i = 0; i < weight.size(); ++i) {
        double d2 = 0.0;
        for (int j = 0; j < samples[a].components(); ++j) {
          const double dj = samples[a].component(j)[i] - samples[b].component(j)[i];
          d2 += dj * dj;
        }
        weight[i] = std::sqrt(samples[a].magnitude(i) + samples[b].magnitude(i)) * std::sqrt(d2);
      }
      detail::fold_ratio(num, lp_norm(g, weight, p), rep.lipschitz, rep.all_finite);
    }
  return rep;
}

}  // namespace snse
