#pragma once

// Resolvent-type bound on the damping kernel:
//   int_tau^inf exp(-Gamma(t, tau)) dt <= (2/K) (1+tau)^alpha   for tau >= tau0,
// with Gamma(t, tau) = int_tau^t gamma(s) ds.

#include "vandamp/core.hpp"
#include "vandamp/problem/damping.hpp"
#include "vandamp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vandamp {

/// Gamma(t, tau), closed form for power schedules.
inline double big_gamma(const DampingSchedule& schedule, double tau, double t) {
  if (!(tau >= 0.0)) throw PreconditionError("big_gamma: tau must be >= 0");
  if (t < tau) throw PreconditionError("big_gamma: need t >= tau");
  return schedule.integral(tau, t);
}

/// Smallest threshold with alpha / (K (1+tau0)^(1-alpha)) <= 1/2, and never below t0.
inline double tau0(const DampingSchedule& schedule) {
  const double a = schedule.alpha();
  const double threshold = std::pow(2.0 * a / schedule.K(), 1.0 / (1.0 - a)) - 1.0;
  return std::max({schedule.t0(), threshold, 0.0});
}

struct Lemma1Result {
  double lhs = 0.0;         // quadrature on [tau, T] plus analytic tail bound
  double rhs = 0.0;         // (2/K) (1+tau)^alpha
  double tail_bound = 0.0;
  double horizon = 0.0;     // final T used for the quadrature
  bool pass = false;        // lhs <= rhs (1 + 1e-9)
};

/// Upper bound on int_T^inf exp(-Gamma(t, tau)) dt obtained by integrating by
/// parts against (1+t)^alpha gamma(t) >= K:
///   <= exp(-Gamma(T, tau)) (1+T)^alpha / (K (1 - q)),  q = alpha / (K (1+T)^(1-alpha)) < 1.
inline double lemma1_tail_bound(const DampingSchedule& schedule, double tau, double T) {
  const double a = schedule.alpha();
  const double K = schedule.K();
  const double q = a / (K * std::pow(1.0 + T, 1.0 - a));
  if (q >= 1.0) return std::numeric_limits<double>::infinity();
  return std::exp(-big_gamma(schedule, tau, T)) * std::pow(1.0 + T, a) / (K * (1.0 - q));
}

inline Lemma1Result lemma1_check(const DampingSchedule& schedule, double tau, double T_quad = 0.0) {
  const double threshold = tau0(schedule);
  if (tau < threshold)
    throw PreconditionError("lemma1_check: tau = " + std::to_string(tau) +
                            " is below tau0 = " + std::to_string(threshold));
  double T = std::max(T_quad, tau + 1.0);
  while (lemma1_tail_bound(schedule, tau, T) > 1e-12) T = 2.0 * T + 1.0;

  auto kernel = [&](double t) { return std::exp(-schedule.integral(tau, t)); };
  auto tail = [&](double x) { return lemma1_tail_bound(schedule, tau, x); };
  Lemma1Result r;
  r.horizon = T;
  r.tail_bound = tail(T);
  r.lhs = quad::integrate_geometric(kernel, tau, T, tail, 1e-14) + r.tail_bound;
  r.rhs = 2.0 / schedule.K() * std::pow(1.0 + tau, schedule.alpha());
  r.pass = r.lhs <= r.rhs * (1.0 + 1e-9);
  return r;
}

}  // namespace vandamp
