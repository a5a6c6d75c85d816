#pragma once

// Damping schedules gamma(t) together with the two structural hypotheses the
// convergence theory places on them:
//   (h1)  gamma(t) >= K / (1+t)^alpha           for t >= t0
//   (h2)  t -> (1+t)^alpha * gamma(t) is nonincreasing for t >= t0
// Power families satisfy both by construction; tabulated schedules are
// accepted as long as gamma >= 0 and are checked explicitly with check_damping.

#include "vandamp/core.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace vandamp {

class DampingSchedule {
 public:
  enum class Kind { power, scaled_power, tabulated };

  /// gamma(t) = K (1+t)^-alpha
  static DampingSchedule power(double K, double alpha, double t0 = 0.0) {
    return DampingSchedule(Kind::power, K, alpha, t0, 1.0, {}, {});
  }

  /// gamma(t) = scale * K (1+t)^-alpha with scale >= 1
  static DampingSchedule scaled_power(double K, double alpha, double scale, double t0 = 0.0) {
    if (!(scale >= 1.0)) throw InputError("damping: scale must be >= 1");
    return DampingSchedule(Kind::scaled_power, K, alpha, t0, scale, {}, {});
  }

  /// Piecewise-linear gamma through (times[i], values[i]); times must start at 0.
  /// Past the last node the schedule continues as values.back() * ((1+t_last)/(1+t))^alpha.
  /// (K, alpha, t0) are the declared hypothesis constants and are not enforced here.
  static DampingSchedule tabulated(std::vector<double> times, std::vector<double> values, double K,
                                   double alpha, double t0 = 0.0) {
    if (times.empty() || times.size() != values.size())
      throw InputError("damping: tabulated schedule needs matching, nonempty time/value arrays");
    if (times.front() != 0.0) throw InputError("damping: tabulated schedule must start at t = 0");
    for (std::size_t i = 1; i < times.size(); ++i)
      if (!(times[i] > times[i - 1])) throw InputError("damping: tabulated times must increase");
    for (double g : values)
      if (!(g >= 0.0) || !std::isfinite(g)) throw InputError("damping: gamma must be >= 0");
    return DampingSchedule(Kind::tabulated, K, alpha, t0, 1.0, std::move(times), std::move(values));
  }

  Kind kind() const { return kind_; }
  double K() const { return K_; }
  double alpha() const { return alpha_; }
  double t0() const { return t0_; }
  double scale() const { return scale_; }
  bool is_power_family() const { return kind_ != Kind::tabulated; }

  double operator()(double t) const {
    if (kind_ != Kind::tabulated) return scale_ * K_ * std::pow(1.0 + t, -alpha_);
    if (t >= times_.back()) {
      if (alpha_ == 0.0) return values_.back();
      return values_.back() * std::pow((1.0 + times_.back()) / (1.0 + t), alpha_);
    }
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const auto i = static_cast<std::size_t>(it - times_.begin()) - 1;
    const double w = (t - times_[i]) / (times_[i + 1] - times_[i]);
    return (1.0 - w) * values_[i] + w * values_[i + 1];
  }

  /// Gamma(t, tau) = integral of gamma over [tau, t]; exact for every kind.
  double integral(double tau, double t) const {
    if (t < tau) throw InputError("damping: integral needs t >= tau");
    if (t == tau) return 0.0;
    if (kind_ != Kind::tabulated) return scale_ * K_ * power_primitive_diff(tau, t);

    double sum = 0.0;
    const double last = times_.back();
    if (tau < last) {
      const double hi = std::min(t, last);
      auto it = std::upper_bound(times_.begin(), times_.end(), tau);
      auto i = static_cast<std::size_t>(it - times_.begin()) - 1;
      double lo = tau;
      while (lo < hi) {
        const double seg_hi = std::min(hi, times_[i + 1]);
        sum += 0.5 * (seg_hi - lo) * ((*this)(lo) + (*this)(seg_hi));
        lo = seg_hi;
        ++i;
      }
    }
    if (t > last) {
      const double a = std::max(tau, last);
      sum += values_.back() * std::pow(1.0 + last, alpha_) * power_primitive_diff(a, t);
    }
    return sum;
  }

  const std::vector<double>& table_times() const { return times_; }
  const std::vector<double>& table_values() const { return values_; }

 private:
  DampingSchedule(Kind kind, double K, double alpha, double t0, double scale,
                  std::vector<double> times, std::vector<double> values)
      : kind_(kind), K_(K), alpha_(alpha), t0_(t0), scale_(scale), times_(std::move(times)),
        values_(std::move(values)) {
    if (!(K > 0.0) || !std::isfinite(K)) throw InputError("damping: K must be > 0");
    if (!(alpha >= 0.0 && alpha < 1.0))
      throw InputError("damping: alpha must lie in [0, 1), got " + std::to_string(alpha));
    if (!(t0 >= 0.0) || !std::isfinite(t0)) throw InputError("damping: t0 must be >= 0");
  }

  // integral of (1+s)^-alpha over [a, b], written to avoid cancellation for b close to a
  double power_primitive_diff(double a, double b) const {
    const double one_m = 1.0 - alpha_;
    const double log_ratio = std::log1p((b - a) / (1.0 + a));
    return std::pow(1.0 + a, one_m) * std::expm1(one_m * log_ratio) / one_m;
  }

  Kind kind_;
  double K_;
  double alpha_;
  double t0_;
  double scale_;
  std::vector<double> times_;
  std::vector<double> values_;
};

inline double gamma_eval(const DampingSchedule& schedule, double t) {
  if (!(t >= 0.0)) throw PreconditionError("gamma_eval: t must be >= 0");
  return schedule(t);
}

struct HypothesisOutcome {
  bool holds = true;
  std::optional<double> first_violation;  // earliest grid time where the check fails
};

struct DampingReport {
  HypothesisOutcome h1;  // gamma(t) (1+t)^alpha >= K
  HypothesisOutcome h2;  // (1+t)^alpha gamma(t) nonincreasing
  bool all_hold() const { return h1.holds && h2.holds; }
};

/// Checks (h1) and (h2) on the grid points with t >= t0. (h2) is checked by
/// comparing consecutive grid points. Comparisons carry a 1e-12 relative slack so
/// that schedules with (1+t)^alpha gamma(t) identically constant pass.
inline DampingReport check_damping(const DampingSchedule& schedule, const std::vector<double>& grid) {
  if (grid.empty()) throw InputError("check_damping: empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0)) throw InputError("check_damping: grid times must be >= 0");
    if (i > 0 && grid[i] < grid[i - 1]) throw InputError("check_damping: grid must be sorted");
  }
  constexpr double slack = 1e-12;
  DampingReport report;
  std::optional<double> previous;
  for (double t : grid) {
    if (t < schedule.t0()) continue;
    const double product = schedule(t) * std::pow(1.0 + t, schedule.alpha());
    if (report.h1.holds && product < schedule.K() * (1.0 - slack)) {
      report.h1 = {false, t};
    }
    if (report.h2.holds && previous && product > *previous * (1.0 + slack) + 1e-300) {
      report.h2 = {false, t};
    }
    previous = product;
  }
  return report;
}

}  // namespace vandamp
