#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace kovi {

enum class BetaKind { constant, fixed_design, self_normalized, covering };

inline const char* to_string(BetaKind k) {
  switch (k) {
    case BetaKind::constant: return "constant";
    case BetaKind::fixed_design: return "fixed-design";
    case BetaKind::self_normalized: return "self-normalized";
    case BetaKind::covering: return "covering";
  }
  throw std::invalid_argument("unknown beta kind");
}

inline BetaKind beta_kind_from_string(const std::string& s) {
  if (s == "constant") return BetaKind::constant;
  if (s == "fixed-design") return BetaKind::fixed_design;
  if (s == "self-normalized") return BetaKind::self_normalized;
  if (s == "covering") return BetaKind::covering;
  throw std::invalid_argument("unknown beta kind '" + s + "'");
}

// Confidence-width multiplier in front of the posterior stddev:
//
//   constant        beta = constant_value
//   fixed-design    beta = c_f + (sigma/sqrt(rho)) sqrt(2 log(1/delta))
//   self-normalized beta = c_f + (sigma/sqrt(rho)) sqrt(2 log(1/delta) + gamma)
//   covering        beta = c_f + (sigma/sqrt(rho)) sqrt(2 log(1/delta) + gamma
//                                                       + cover term)
//
// gamma is the realized information gain of the data the posterior was fit
// on.  The covering term stands in for the log covering number of the value
// class; it is either supplied directly or, in auto mode, taken as
// cover_dim * log(1 + n).
struct BetaSchedule {
  BetaKind kind = BetaKind::self_normalized;
  double c_f = 1.0;
  double sigma = 1.0;
  double delta = 0.05;
  double rho = 1.0;
  double constant_value = 1.0;
  double cover_term = 0.0;
  bool cover_auto = false;
  int cover_dim = 1;

  void validate() const {
    if (!(delta > 0.0 && delta < 1.0))
      throw std::invalid_argument("beta schedule: delta must lie in (0, 1)");
    if (c_f < 0.0)
      throw std::invalid_argument("beta schedule: c_f must be nonnegative");
    if (sigma < 0.0)
      throw std::invalid_argument("beta schedule: sigma must be nonnegative");
    if (!(rho > 0.0))
      throw std::invalid_argument("beta schedule: rho must be positive");
    if (constant_value < 0.0)
      throw std::invalid_argument(
          "beta schedule: constant value must be nonnegative");
    if (cover_term < 0.0)
      throw std::invalid_argument(
          "beta schedule: cover term must be nonnegative");
    if (cover_dim < 1)
      throw std::invalid_argument("beta schedule: cover dim must be >= 1");
  }

  friend bool operator==(const BetaSchedule&, const BetaSchedule&) = default;
};

inline double beta_width(const BetaSchedule& sched, std::size_t n,
                         double gamma) {
  sched.validate();
  if (gamma < 0.0)
    throw std::invalid_argument("beta_width: gamma must be nonnegative");
  switch (sched.kind) {
    case BetaKind::constant:
      return sched.constant_value;
    case BetaKind::fixed_design:
      return sched.c_f + sched.sigma / std::sqrt(sched.rho) *
                             std::sqrt(2.0 * std::log(1.0 / sched.delta));
    case BetaKind::self_normalized:
      return sched.c_f +
             sched.sigma / std::sqrt(sched.rho) *
                 std::sqrt(2.0 * std::log(1.0 / sched.delta) + gamma);
    case BetaKind::covering: {
      const double cover =
          sched.cover_auto
              ? static_cast<double>(sched.cover_dim) *
                    std::log1p(static_cast<double>(n))
              : sched.cover_term;
      return sched.c_f +
             sched.sigma / std::sqrt(sched.rho) *
                 std::sqrt(2.0 * std::log(1.0 / sched.delta) + gamma + cover);
    }
  }
  throw std::invalid_argument("unknown beta kind");
}

}  // namespace kovi
