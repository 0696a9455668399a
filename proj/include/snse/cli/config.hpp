#pragma once

// Experiment configuration: JSON key tree with schema validation. Every
// accepted key is listed here; anything else is rejected with its full path.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "snse/snse.hpp"

namespace snse::cli {

using Json = nlohmann::ordered_json;

/// Validation failure attributed to one config key (exit status 2).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what) : std::runtime_error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"verify-operators", "heat-run",           "snse-run",
                                              "converge-study",   "uniqueness-check", "noise-audit"};
  return names;
}

struct InitialSpec {
  std::string kind = "random_smooth";  // random_smooth | localized | taylor_green | zero
  double rms = 1.0;                    // amplitude for taylor_green
  int max_mode = 3;
  double width = 3.0;  // envelope width of the localized kind
  std::optional<double> n_level;  // spatial cutoff level; none = P<=k Leray u0 only
};

struct NoiseSpec {
  bool enabled = true;
  NoiseKind kind = NoiseKind::linear_mollified;
  int K = 16;
  std::vector<double> weights;  // filled from "inverse_k" when not given explicitly
  double eps = 1.0;
};

struct VerifySpec {
  std::vector<int> sizes{8, 16};
  int seeds = 20;
};

struct ExperimentConfig {
  std::string command = "verify-operators";
  int d = 3;
  std::vector<int> dims{16, 16, 16};
  std::vector<double> L{kDefaultBoxSide, kDefaultBoxSide, kDefaultBoxSide};
  double p = 4.0;
  double k = 8.0;
  KSchedule k_schedule = KSchedule::identity;
  double N = 50.0;
  std::optional<double> M;  // none = smallest quarter-bound M0
  double K = 1.0;
  NoiseSpec noise;
  bool nonlinear = true;
  bool dealias = false;
  double dt = 0.01;
  double T = 0.2;
  int ensemble_size = 1;
  std::uint64_t master_seed = 0;
  int threads = 1;
  std::string output_dir = "snse_out";
  InitialSpec initial;
  std::vector<double> n_list{2.0, 4.0, 8.0};
  Perturbation perturbation = Perturbation::none;
  std::size_t snapshot_stride = 0;
  int audit_samples = 8;
  VerifySpec verify;

  Grid grid() const { return Grid(dims, L); }

  NoiseModel noise_model() const {
    NoiseModel m{noise.K, noise.weights, noise.kind, noise.eps, master_seed};
    return m;
  }

  /// Solver configuration for trajectory seed `seed`.
  SnseConfig snse_config(std::uint64_t seed) const {
    SnseConfig c;
    c.grid = grid();
    c.p = p;
    c.k = k;
    c.N = N;
    c.noise = noise_model();
    c.noise.rng_seed = seed;
    c.dt = dt;
    c.T = T;
    c.seed = seed;
    c.dealias = dealias;
    c.nonlinear_enabled = nonlinear;
    c.noise_enabled = noise.enabled;
    return c;
  }
};

inline std::string to_string(KSchedule s) { return s == KSchedule::identity ? "identity" : "energy"; }

inline std::string to_string(Perturbation p) {
  switch (p) {
    case Perturbation::none: return "none";
    case Perturbation::tiny: return "tiny";
    default: return "different_seed";
  }
}

namespace detail {

/// Typed access to one object level, remembering which keys were consumed.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "(root)" : path_, "expected an object");
  }

  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
  bool has(const std::string& k) {
    seen_.insert(k);
    return j_.contains(k) && !j_.at(k).is_null();
  }
  const Json& at(const std::string& k) const { return j_.at(k); }

  double number(const std::string& k, double fallback) {
    if (!has(k)) return fallback;
    if (!at(k).is_number()) throw ConfigError(key(k), "expected a number");
    const double v = at(k).get<double>();
    if (!std::isfinite(v)) throw ConfigError(key(k), "must be finite");
    return v;
  }

  long long integer(const std::string& k, long long fallback) {
    if (!has(k)) return fallback;
    if (!at(k).is_number_integer()) throw ConfigError(key(k), "expected an integer");
    return at(k).get<long long>();
  }

  bool boolean(const std::string& k, bool fallback) {
    if (!has(k)) return fallback;
    if (!at(k).is_boolean()) throw ConfigError(key(k), "expected true or false");
    return at(k).get<bool>();
  }

  std::string string(const std::string& k, const std::string& fallback) {
    if (!has(k)) return fallback;
    if (!at(k).is_string()) throw ConfigError(key(k), "expected a string");
    return at(k).get<std::string>();
  }

  std::vector<double> numbers(const std::string& k, std::vector<double> fallback) {
    if (!has(k)) return fallback;
    if (!at(k).is_array()) throw ConfigError(key(k), "expected an array of numbers");
    std::vector<double> out;
    for (const auto& v : at(k)) {
      if (!v.is_number()) throw ConfigError(key(k), "expected an array of numbers");
      out.push_back(v.get<double>());
    }
    return out;
  }

  /// Throws on the first key that was never asked for.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(key(it.key()), "unknown key");
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline void check(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key, what);
}

}  // namespace detail

/// Parses and validates a config document; missing keys take their defaults.
inline ExperimentConfig parse_config(const Json& doc) {
  using detail::check;
  ExperimentConfig c;
  detail::Section root(doc, "");

  c.command = root.string("command", c.command);
  bool known = false;
  for (const auto& n : command_names()) known = known || n == c.command;
  check(known, "command", "unknown command '" + c.command + "'");

  if (root.has("grid")) {
    detail::Section g(root.at("grid"), "grid");
    if (g.has("dims")) {
      const auto dims = g.numbers("dims", {});
      check(dims.size() == 2 || dims.size() == 3, "grid.dims", "needs 2 or 3 entries");
      c.dims.clear();
      for (double v : dims) {
        check(v == std::floor(v) && v >= 4 && static_cast<long>(v) % 2 == 0, "grid.dims",
              "sizes must be even integers >= 4");
        c.dims.push_back(static_cast<int>(v));
      }
    }
    c.d = static_cast<int>(c.dims.size());
    if (g.has("L")) {
      if (g.at("L").is_array()) {
        c.L = g.numbers("L", {});
        check(c.L.size() == c.dims.size(), "grid.L", "needs one extent per axis");
      } else {
        c.L.assign(c.dims.size(), g.number("L", kDefaultBoxSide));
      }
    } else {
      c.L.assign(c.dims.size(), kDefaultBoxSide);
    }
    for (double v : c.L) check(v > 0.0, "grid.L", "extents must be positive");
    g.finish();
  }

  c.p = root.number("p", c.p);
  check(c.p > 2.0, "p", "must be > 2");
  c.k = root.number("k", c.k);
  check(c.k >= 1.0, "k", "must be >= 1");
  const auto sched = root.string("k_schedule", "identity");
  check(sched == "identity" || sched == "energy", "k_schedule", "must be 'identity' or 'energy'");
  c.k_schedule = sched == "identity" ? KSchedule::identity : KSchedule::energy;
  c.N = root.number("N", c.N);
  check(c.N > 0.0, "N", "must be positive");
  if (root.has("M")) {
    if (root.at("M").is_string()) {
      check(root.at("M").get<std::string>() == "quarter_bound", "M", "must be a number >= 1 or 'quarter_bound'");
    } else {
      c.M = root.number("M", 1.0);
      check(*c.M >= 1.0, "M", "must be >= 1");
    }
  }
  c.K = root.number("K", c.K);
  check(c.K >= 1.0, "K", "must be >= 1");

  if (root.has("noise")) {
    detail::Section n(root.at("noise"), "noise");
    c.noise.enabled = n.boolean("enabled", c.noise.enabled);
    try {
      c.noise.kind = noise_kind_from_string(n.string("kind", std::string(to_string(c.noise.kind))));
    } catch (const PreconditionError& e) {
      throw ConfigError("noise.kind", e.what());
    }
    const auto K = n.integer("K", c.noise.K);
    check(K >= 1 && K <= 4096, "noise.K", "must be in [1, 4096]");
    c.noise.K = static_cast<int>(K);
    if (n.has("weights") && n.at("weights").is_array()) {
      c.noise.weights = n.numbers("weights", {});
      check(c.noise.weights.size() == static_cast<std::size_t>(c.noise.K), "noise.weights",
            "needs exactly noise.K entries");
    } else {
      check(n.string("weights", "inverse_k") == "inverse_k", "noise.weights", "must be 'inverse_k' or a list");
    }
    c.noise.eps = n.number("eps", c.noise.eps);
    n.finish();
  }
  if (c.noise.weights.empty()) c.noise.weights = NoiseModel::inverse_k(c.noise.K, c.noise.kind, 1.0, 0).weights;
  try {
    c.noise_model().validate();
  } catch (const PreconditionError& e) {
    throw ConfigError("noise", e.what());
  }
  check(c.noise.eps < 0.5 * *std::min_element(c.L.begin(), c.L.end()), "noise.eps", "must be below half the box side");

  c.nonlinear = root.boolean("nonlinear", c.nonlinear);
  c.dealias = root.boolean("dealias", c.dealias);
  c.dt = root.number("dt", c.dt);
  check(c.dt > 0.0, "dt", "must be positive");
  c.T = root.number("T", c.T);
  check(c.T > 0.0, "T", "must be positive");
  try {
    step_count(c.T, c.dt);
  } catch (const PreconditionError& e) {
    throw ConfigError("dt", e.what());
  }
  const auto ens = root.integer("ensemble_size", c.ensemble_size);
  check(ens >= 1 && ens <= 100000, "ensemble_size", "must be in [1, 100000]");
  c.ensemble_size = static_cast<int>(ens);
  const auto seed = root.integer("master_seed", 0);
  check(seed >= 0, "master_seed", "must be nonnegative");
  c.master_seed = static_cast<std::uint64_t>(seed);
  const auto threads = root.integer("threads", c.threads);
  check(threads >= 1 && threads <= 256, "threads", "must be in [1, 256]");
  c.threads = static_cast<int>(threads);
  c.output_dir = root.string("output_dir", c.output_dir);
  check(!c.output_dir.empty(), "output_dir", "must not be empty");

  if (root.has("initial")) {
    detail::Section i(root.at("initial"), "initial");
    c.initial.kind = i.string("kind", c.initial.kind);
    check(c.initial.kind == "random_smooth" || c.initial.kind == "localized" || c.initial.kind == "taylor_green" ||
              c.initial.kind == "zero",
          "initial.kind", "must be 'random_smooth', 'localized', 'taylor_green' or 'zero'");
    c.initial.rms = i.number("rms", c.initial.rms);
    check(c.initial.rms >= 0.0, "initial.rms", "must be nonnegative");
    c.initial.width = i.number("width", c.initial.width);
    check(c.initial.width > 0.0, "initial.width", "must be positive");
    const auto mm = i.integer("max_mode", c.initial.max_mode);
    check(mm >= 1, "initial.max_mode", "must be >= 1");
    c.initial.max_mode = static_cast<int>(mm);
    if (i.has("n_level")) {
      c.initial.n_level = i.number("n_level", 1.0);
      check(*c.initial.n_level >= 1.0, "initial.n_level", "must be >= 1");
    }
    i.finish();
  }

  if (root.has("n_list")) {
    c.n_list = root.numbers("n_list", {});
    check(c.n_list.size() >= 2, "n_list", "needs at least two levels");
    for (double n : c.n_list) check(n >= 1.0, "n_list", "levels must be >= 1");
  }
  const auto pert = root.string("perturbation", "none");
  check(pert == "none" || pert == "tiny" || pert == "different_seed", "perturbation",
        "must be 'none', 'tiny' or 'different_seed'");
  c.perturbation = pert == "none" ? Perturbation::none : pert == "tiny" ? Perturbation::tiny : Perturbation::different_seed;
  const auto stride = root.integer("snapshot_stride", 0);
  check(stride >= 0, "snapshot_stride", "must be nonnegative");
  c.snapshot_stride = static_cast<std::size_t>(stride);
  const auto samples = root.integer("audit_samples", c.audit_samples);
  check(samples >= 2, "audit_samples", "must be >= 2");
  c.audit_samples = static_cast<int>(samples);

  if (root.has("verify")) {
    detail::Section v(root.at("verify"), "verify");
    if (v.has("sizes")) {
      c.verify.sizes.clear();
      for (double s : v.numbers("sizes", {})) {
        check(s == std::floor(s) && s >= 4 && static_cast<long>(s) % 2 == 0, "verify.sizes",
              "sizes must be even integers >= 4");
        c.verify.sizes.push_back(static_cast<int>(s));
      }
      check(!c.verify.sizes.empty(), "verify.sizes", "must not be empty");
    }
    const auto s = v.integer("seeds", c.verify.seeds);
    check(s >= 1, "verify.seeds", "must be >= 1");
    c.verify.seeds = static_cast<int>(s);
    v.finish();
  }
  root.finish();

  if (c.command == "snse-run" || c.command == "converge-study" || c.command == "uniqueness-check") {
    try {
      c.snse_config(0).validate();
    } catch (const PreconditionError& e) {
      throw ConfigError("(solver)", e.what());
    }
  }
  return c;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("(document)", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

/// Normalized config restricted to the keys the command reads. output_dir and
/// threads are excluded: they do not change any emitted value.
inline Json canonical_config(const ExperimentConfig& c) {
  Json j;
  j["command"] = c.command;
  j["grid"] = Json{{"dims", c.dims}, {"L", c.L}};
  j["p"] = c.p;
  if (c.command == "verify-operators") {
    j["verify"] = Json{{"sizes", c.verify.sizes}, {"seeds", c.verify.seeds}};
    j["master_seed"] = c.master_seed;
    return j;
  }
  j["master_seed"] = c.master_seed;
  j["initial"] = Json{{"kind", c.initial.kind}, {"rms", c.initial.rms}, {"max_mode", c.initial.max_mode}};
  if (c.initial.kind == "localized") j["initial"]["width"] = c.initial.width;
  const Json noise{{"enabled", c.noise.enabled},
                   {"kind", std::string(to_string(c.noise.kind))},
                   {"K", c.noise.K},
                   {"weights", c.noise.weights},
                   {"eps", c.noise.eps}};
  if (c.command == "noise-audit") {
    j["noise"] = noise;
    j["audit_samples"] = c.audit_samples;
    return j;
  }
  j["noise"] = noise;
  j["dt"] = c.dt;
  j["T"] = c.T;
  j["ensemble_size"] = c.ensemble_size;
  if (c.command == "heat-run") return j;
  j["initial"]["n_level"] = c.initial.n_level ? Json(*c.initial.n_level) : Json(nullptr);
  j["N"] = c.N;
  j["M"] = c.M ? Json(*c.M) : Json("quarter_bound");
  j["K"] = c.K;
  j["nonlinear"] = c.nonlinear;
  j["dealias"] = c.dealias;
  if (c.command == "converge-study") {
    j["k_schedule"] = to_string(c.k_schedule);
    j["n_list"] = c.n_list;
    return j;
  }
  j["k"] = c.k;
  if (c.command == "snse-run") j["snapshot_stride"] = c.snapshot_stride;
  if (c.command == "uniqueness-check") j["perturbation"] = to_string(c.perturbation);
  return j;
}

/// Output directory: SNSE_OUTPUT_DIR when set and nonempty, else the config value.
inline std::string resolve_output_dir(const ExperimentConfig& c) {
  const char* env = std::getenv("SNSE_OUTPUT_DIR");
  return env && *env ? std::string(env) : c.output_dir;
}

}  // namespace snse::cli
