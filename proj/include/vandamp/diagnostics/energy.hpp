#pragma once

#include "vandamp/core.hpp"
#include "vandamp/dynamics/integrator.hpp"
#include "vandamp/problem/convex_problem.hpp"
#include "vandamp/problem/damping.hpp"
#include "vandamp/problem/source.hpp"
#include "vandamp/quadrature.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace vandamp {

/// E = 1/2 |u'|_H^2 + Phi(u) - Phi*
inline double energy(const ConvexProblem& problem, const TrajectoryState& state) {
  require_dimension(state.u, problem.dimension(), "energy");
  require_dimension(state.v, problem.dimension(), "energy");
  return 0.5 * problem.inner(state.v, state.v) + (problem.spec().phi(state.u) - problem.phi_star());
}

/// p = 1/2 |u - u_bar|_H^2
inline double anchor(const ConvexProblem& problem, const TrajectoryState& state) {
  require_dimension(state.u, problem.dimension(), "anchor");
  const Vector d = state.u - problem.minimizer();
  return 0.5 * problem.inner(d, d);
}

/// S(t) = int_t^inf |g(s)|^2 / (4 gamma(s)) ds, the correction that turns E into
/// the nonincreasing modified energy. Past the tabulated region (everywhere for
/// power schedules) gamma = kappa (1+s)^-alpha, and the tail has a closed form for
/// the power and exp families. For the modulated family sin^2 = (1 - cos 2ws)/2
/// splits it into a closed-form envelope term and an oscillatory term, which is
/// integrated up to a cutoff and finished with two integrations by parts.
class ModifiedEnergyTail {
 public:
  ModifiedEnergyTail(const DampingSchedule& schedule, const SourceTerm& source)
      : schedule_(schedule), source_(source) {
    const double a = schedule.alpha();
    converges_ = source.is_zero() || weighted_integral_finite(source, a, 2);
    if (schedule.kind() == DampingSchedule::Kind::tabulated) {
      const double last = schedule.table_times().back();
      kappa_ = schedule.table_values().back() * std::pow(1.0 + last, a);
      tail_start_ = last;
      if (!(kappa_ > 0.0) && !source.is_zero()) converges_ = false;
    } else {
      kappa_ = schedule.scale() * schedule.K();
      tail_start_ = 0.0;
    }
    closed_form_ = source.is_zero() ||
                   (schedule.is_power_family() && source.family() != SourceTerm::Family::modulated_power);
  }

  bool converges() const { return converges_; }
  /// True when operator() is a cheap closed form at every t.
  bool closed_form() const { return closed_form_; }

  double operator()(double t) const {
    if (!converges_)
      throw DivergenceError(
          "modified energy: int |g|^2 / (4 gamma) diverges; use the plain energy instead");
    if (source_.is_zero()) return 0.0;
    const double start = std::max(t, tail_start_);
    return segment(t, start) + beyond(start);
  }

  /// int_a^b |g|^2 / (4 gamma) for a <= b.
  double segment(double a, double b) const {
    if (b <= a || source_.is_zero()) return 0.0;
    const double piece = source_.family() == SourceTerm::Family::modulated_power
                             ? std::numbers::pi / source_.frequency()
                             : 1.0;
    return quad::integrate_pieces([this](double s) { return density(s); }, a, b, piece, 1e-13);
  }

  double density(double s) const {
    const double g = source_.norm(s);
    if (g == 0.0) return 0.0;
    return g * g / (4.0 * schedule_(s));
  }

 private:
  // int_T^inf for T >= tail_start_, where gamma = kappa (1+s)^-alpha.
  double beyond(double T) const {
    const double a = schedule_.alpha();
    const double c = source_.amplitude();
    const double pref = c * c / (4.0 * kappa_);
    switch (source_.family()) {
      case SourceTerm::Family::zero: return 0.0;
      case SourceTerm::Family::power_decay: {
        const double e = a - 2.0 * source_.beta();
        return pref * std::pow(1.0 + T, e + 1.0) / (-e - 1.0);
      }
      case SourceTerm::Family::exp_decay: {
        // int_T^inf (1+s)^a exp(-k s) ds = e^k k^-(a+1) Gamma(a+1, k(1+T))
        const double k = 2.0 * source_.rate();
        return pref * std::exp(k) * std::pow(k, -(a + 1.0)) *
               boost::math::tgamma(a + 1.0, k * (1.0 + T));
      }
      case SourceTerm::Family::modulated_power: {
        const double e = a - 2.0 * source_.beta();
        const double envelope = std::pow(1.0 + T, e + 1.0) / (-e - 1.0);
        return 0.5 * pref * (envelope - oscillatory(e, 2.0 * source_.frequency(), T, envelope));
      }
    }
    return 0.0;
  }

  // int_T^inf (1+s)^e cos(k s) ds with e < -1. Past a cutoff X,
  //   int_X^inf f cos(ks) = -f(X) sin(kX)/k - f'(X) cos(kX)/k^2 + R,  |R| <= |f'(X)|/k^2,
  // for f = (1+s)^e; X is pushed out until |R| is negligible against `scale`.
  static double oscillatory(double e, double k, double T, double scale) {
    auto f = [e](double s) { return std::pow(1.0 + s, e); };
    auto df = [e](double s) { return e * std::pow(1.0 + s, e - 1.0); };
    const double target = 1e-14 * scale;
    // smallest X with |f'(X)| / k^2 <= target
    const double X = std::max(T, std::pow(target * k * k / -e, 1.0 / (e - 1.0)) - 1.0);
    const double head = quad::integrate_pieces(
        [&](double s) { return f(s) * std::cos(k * s); }, T, X, 2.0 * std::numbers::pi / k, 1e-13);
    return head - f(X) * std::sin(k * X) / k - df(X) * std::cos(k * X) / (k * k);
  }

  DampingSchedule schedule_;
  SourceTerm source_;
  bool converges_ = true;
  bool closed_form_ = false;
  double kappa_ = 0.0;
  double tail_start_ = 0.0;
};

/// E~(t) = E(t) + int_t^inf |g|^2 / (4 gamma). Throws DivergenceError if the tail diverges.
inline double modified_energy(const ConvexProblem& problem, const DampingSchedule& schedule,
                              const SourceTerm& source, const TrajectoryState& state) {
  const ModifiedEnergyTail tail(schedule, source);
  return energy(problem, state) + tail(state.t);
}

}  // namespace vandamp
