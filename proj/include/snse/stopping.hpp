#pragma once

#include <cmath>
#include <cstddef>
#include <limits>

#include "snse/error.hpp"
#include "snse/ledger.hpp"

namespace snse {

/// First time the functional sup_{[0,t]} ||u||_p^p + int_0^t ||u||_{3p}^p ds
/// reaches M K^p. `tau` is +infinity while the threshold has not been reached.
struct StoppingRecord {
  double M = 1.0;
  double K = 1.0;
  bool triggered = false;
  double tau = std::numeric_limits<double>::infinity();
  double functional_at_tau = 0.0;
  std::size_t step_index = 0;
  // Quarter-bound bookkeeping: the smallest admissible M0 for the prepared
  // data and whether M >= M0 holds. Filled in by the caller when known.
  double M0 = 1.0;
  bool quarter_bound_ok = true;
};

/// Fold over ledger rows in time order.
class StoppingMonitor {
 public:
  StoppingMonitor(double M, double K, double p) {
    require(M >= 1.0, "stopping threshold multiplier M must be >= 1");
    require(K >= 1.0, "initial-data bound K must be >= 1");
    rec_.M = M;
    rec_.K = K;
    threshold_ = M * std::pow(K, p);
  }

  double threshold() const noexcept { return threshold_; }

  static double functional(const LedgerRow& row) noexcept { return row.sup_lp_p + row.l3p_cum; }

  /// Returns true on the row where the threshold is first reached.
  bool observe(const LedgerRow& row, std::size_t step_index) {
    if (rec_.triggered) return false;
    const double f = functional(row);
    if (f >= threshold_) {
      rec_.triggered = true;
      rec_.tau = row.t;
      rec_.functional_at_tau = f;
      rec_.step_index = step_index;
      return true;
    }
    return false;
  }

  const StoppingRecord& record() const noexcept { return rec_; }
  StoppingRecord& record() noexcept { return rec_; }

 private:
  StoppingRecord rec_;
  double threshold_ = 0.0;
};

inline StoppingRecord stopping_monitor(const EnergyLedger& ledger, double M, double K, double p) {
  StoppingMonitor mon(M, K, p);
  for (std::size_t i = 0; i < ledger.size(); ++i)
    if (mon.observe(ledger.rows()[i], i)) break;
  return mon.record();
}

}  // namespace snse
