#pragma once

// Ledger CSV, binary field snapshots and JSON encodings of the reports.

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "snse/error.hpp"
#include "snse/fields.hpp"
#include "snse/ledger.hpp"
#include "snse/monitors.hpp"
#include "snse/noise.hpp"
#include "snse/stopping.hpp"

namespace snse {

inline constexpr const char* kLedgerHeader = "t,lp_p,sup_lp_p,grad_energy_cum,l3p_cum,phi_value,stopped_flag";

/// 17 significant digits: enough to round-trip any double.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string ledger_csv(const EnergyLedger& ledger) {
  std::string out = kLedgerHeader;
  out += '\n';
  for (const auto& r : ledger.rows()) {
    for (double v : {r.t, r.lp_p, r.sup_lp_p, r.grad_energy_cum, r.l3p_cum, r.phi_value}) {
      out += format_double(v);
      out += ',';
    }
    out += r.stopped ? '1' : '0';
    out += '\n';
  }
  return out;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void emit_ledger(const EnergyLedger& ledger, const std::string& path) { write_text_file(path, ledger_csv(ledger)); }

/// Parses the CSV produced by ledger_csv. In-memory-only columns come back as zero.
inline EnergyLedger parse_ledger_csv(const std::string& text, double p) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kLedgerHeader) throw std::runtime_error("ledger CSV header mismatch");
  std::vector<LedgerRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    LedgerRow r;
    double* cols[] = {&r.t, &r.lp_p, &r.sup_lp_p, &r.grad_energy_cum, &r.l3p_cum, &r.phi_value};
    const char* s = line.c_str();
    for (double* c : cols) {
      char* end = nullptr;
      *c = std::strtod(s, &end);
      if (end == s || *end != ',') throw std::runtime_error("malformed ledger row: " + line);
      s = end + 1;
    }
    if (std::strcmp(s, "0") != 0 && std::strcmp(s, "1") != 0) throw std::runtime_error("malformed stopped flag: " + line);
    r.stopped = s[0] == '1';
    rows.push_back(r);
  }
  return EnergyLedger(p, std::move(rows));
}

// ---------------------------------------------------------------------------
// Binary snapshots
//
// Layout: 8-byte magic "SNSEFLD1", uint32 d, uint32 dims[3], float64 L[3],
// float64 p, float64 t, then d * points float64 samples, component-major.
// All values little-endian.

namespace detail {

template <class T>
void put_le(std::string& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  out.append(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get_le(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw std::runtime_error("truncated snapshot");
  unsigned char b[sizeof(T)];
  std::memcpy(b, in.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  pos += sizeof(T);
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace detail

inline constexpr char kSnapshotMagic[9] = "SNSEFLD1";

inline std::string encode_snapshot(const RealVectorField& u, double p, double t) {
  const Grid& g = u.grid();
  std::string out(kSnapshotMagic, 8);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim()));
  for (int a = 0; a < 3; ++a) detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.size(a)));
  for (int a = 0; a < 3; ++a) detail::put_le<double>(out, g.extent(a));
  detail::put_le<double>(out, p);
  detail::put_le<double>(out, t);
  for (int j = 0; j < u.components(); ++j)
    for (double v : u.component(j)) detail::put_le<double>(out, v);
  return out;
}

struct Snapshot {
  RealVectorField u;
  double p = 0.0;
  double t = 0.0;
};

inline Snapshot decode_snapshot(const std::string& bytes) {
  if (bytes.size() < 8 || bytes.compare(0, 8, kSnapshotMagic) != 0) throw std::runtime_error("not a snapshot file");
  std::size_t pos = 8;
  const auto d = detail::get_le<std::uint32_t>(bytes, pos);
  std::vector<int> dims;
  std::vector<double> L;
  std::uint32_t n[3];
  double ext[3];
  for (auto& v : n) v = detail::get_le<std::uint32_t>(bytes, pos);
  for (auto& v : ext) v = detail::get_le<double>(bytes, pos);
  for (std::uint32_t a = 0; a < d && a < 3; ++a) {
    dims.push_back(static_cast<int>(n[a]));
    L.push_back(ext[a]);
  }
  Grid g(dims, L);
  const double p = detail::get_le<double>(bytes, pos);
  const double t = detail::get_le<double>(bytes, pos);
  RealVectorField u(g);
  for (int j = 0; j < u.components(); ++j)
    for (auto& v : u.component(j)) v = detail::get_le<double>(bytes, pos);
  if (pos != bytes.size()) throw std::runtime_error("trailing bytes in snapshot");
  return {std::move(u), p, t};
}

// ---------------------------------------------------------------------------
// JSON

using Json = nlohmann::ordered_json;

/// Infinite stopping times are written as null.
inline Json json_time(double t) { return std::isfinite(t) ? Json(t) : Json(nullptr); }

inline Json to_json(const CauchyReport& r) {
  return Json{{"pair", {r.n, r.m}},          {"sup_dist_p", r.sup_dist_p}, {"int_dist_3p", r.int_dist_3p},
              {"tau_n", json_time(r.tau_n)}, {"tau_m", json_time(r.tau_m)}, {"horizon", r.horizon}};
}

inline Json to_json(const StoppingRecord& s) {
  return Json{{"M", s.M},
              {"K", s.K},
              {"triggered", s.triggered},
              {"tau", json_time(s.tau)},
              {"functional_at_tau", s.functional_at_tau},
              {"step_index", s.step_index},
              {"M0", s.M0},
              {"quarter_bound_ok", s.quarter_bound_ok}};
}

inline Json to_json(const NoiseAuditReport& r) {
  return Json{{"growth", r.growth},
              {"lipschitz", r.lipschitz},
              {"gradient", r.gradient},
              {"l2", r.l2},
              {"all_finite", r.all_finite},
              {"samples", r.samples},
              {"pairs", r.pairs}};
}

inline Json to_json(const UniquenessResult& r) {
  return Json{{"max_deviation", r.max_deviation},
              {"relative_deviation", r.relative_deviation},
              {"initial_deviation", r.initial_deviation},
              {"final_deviation", r.final_deviation},
              {"horizon", r.horizon},
              {"times", r.times},
              {"deviations", r.deviations}};
}

}  // namespace snse
