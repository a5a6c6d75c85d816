#pragma once

// u'' + gamma(t) u' + A u + f(u) = g(t) as the first-order system
//   u' = v,   v' = g(t) - gamma(t) v - A u - f(u)
// advanced by classical fixed-step RK4. gamma and g are evaluated at the stage
// times t, t + dt/2, t + dt.

#include "vandamp/core.hpp"
#include "vandamp/diagnostics/energy_record.hpp"
#include "vandamp/problem/convex_problem.hpp"
#include "vandamp/problem/damping.hpp"
#include "vandamp/problem/source.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>

namespace vandamp {

struct TrajectoryState {
  double t = 0.0;
  Vector u;
  Vector v;
};

struct IntegratorConfig {
  double dt = 1e-2;
  double t_end = 1.0;
  int sample_stride = 1;
  double stability_margin = 0.5;
};

/// The three ingredients of one evolution equation. Non-owning.
struct System {
  const ConvexProblem* problem;
  const DampingSchedule* schedule;
  const SourceTerm* source;

  System(const ConvexProblem& p, const DampingSchedule& d, const SourceTerm& s)
      : problem(&p), schedule(&d), source(&s) {}
};

class StabilityError : public std::runtime_error {
 public:
  StabilityError(std::int64_t step, double t)
      : std::runtime_error("integrator: non-finite state at step " + std::to_string(step) +
                           ", t = " + std::to_string(t)),
        step_(step), t_(t) {}

  std::int64_t step() const { return step_; }
  double time() const { return t_; }

  /// Diagnostics recorded before the failure, when the caller kept a record.
  const std::optional<EnergyRecord>& partial_record() const { return partial_; }
  void attach(EnergyRecord record) { partial_ = std::move(record); }

 private:
  std::int64_t step_;
  double t_;
  std::optional<EnergyRecord> partial_;
};

struct Derivative {
  Vector du;
  Vector dv;
};

/// Writes (du, dv) = (v, g(t) - gamma(t) v - grad Phi(u)).
inline void rhs_into(const System& sys, double t, const Vector& u, const Vector& v, Vector& du,
                     Vector& dv) {
  du = v;
  sys.problem->spec().grad_into(u, dv);
  const double gamma = (*sys.schedule)(t);
  dv = -dv - gamma * v;
  if (!sys.source->is_zero()) dv += sys.source->factor(t) * sys.source->direction();
}

inline Derivative rhs(const TrajectoryState& state, const System& sys) {
  require_dimension(state.u, sys.problem->dimension(), "rhs");
  require_dimension(state.v, sys.problem->dimension(), "rhs");
  Derivative d{Vector(state.u.size()), Vector(state.u.size())};
  rhs_into(sys, state.t, state.u, state.v, d.du, d.dv);
  return d;
}

/// Classical RK4 with preallocated stage buffers. The state update uses
/// compensated summation, so over many small steps the accumulated rounding
/// stays below the truncation error. One stepper follows one trajectory.
class Rk4Stepper {
 public:
  explicit Rk4Stepper(Eigen::Index n)
      : ku_{Vector(n), Vector(n), Vector(n), Vector(n)},
        kv_{Vector(n), Vector(n), Vector(n), Vector(n)}, tu_(n), tv_(n),
        cu_(Vector::Zero(n)), cv_(Vector::Zero(n)) {}

  /// Advances (u, v) from time t by dt in place.
  void advance(const System& sys, double t, double dt, Vector& u, Vector& v) {
    const double half = 0.5 * dt;
    rhs_into(sys, t, u, v, ku_[0], kv_[0]);
    tu_ = u + half * ku_[0];
    tv_ = v + half * kv_[0];
    rhs_into(sys, t + half, tu_, tv_, ku_[1], kv_[1]);
    tu_ = u + half * ku_[1];
    tv_ = v + half * kv_[1];
    rhs_into(sys, t + half, tu_, tv_, ku_[2], kv_[2]);
    tu_ = u + dt * ku_[2];
    tv_ = v + dt * kv_[2];
    rhs_into(sys, t + dt, tu_, tv_, ku_[3], kv_[3]);
    const double sixth = dt / 6.0;
    tu_ = sixth * (ku_[0] + 2.0 * ku_[1] + 2.0 * ku_[2] + ku_[3]);
    tv_ = sixth * (kv_[0] + 2.0 * kv_[1] + 2.0 * kv_[2] + kv_[3]);
    compensated_add(u, tu_, cu_);
    compensated_add(v, tv_, cv_);
  }

 private:
  // Kahan update x += dx; c carries the low-order bits lost so far.
  static void compensated_add(Vector& x, const Vector& dx, Vector& c) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double y = dx[i] - c[i];
      const double sum = x[i] + y;
      c[i] = (sum - x[i]) - y;
      x[i] = sum;
    }
  }

  Vector ku_[4];
  Vector kv_[4];
  Vector tu_;
  Vector tv_;
  Vector cu_;
  Vector cv_;
};

inline TrajectoryState step(const TrajectoryState& state, double dt, const System& sys) {
  require_dimension(state.u, sys.problem->dimension(), "step");
  require_dimension(state.v, sys.problem->dimension(), "step");
  TrajectoryState next = state;
  Rk4Stepper stepper(state.u.size());
  stepper.advance(sys, state.t, dt, next.u, next.v);
  next.t = state.t + dt;
  if (!next.u.allFinite() || !next.v.allFinite()) throw StabilityError(0, state.t);
  return next;
}

inline double spectral_bound(const ConvexProblem& problem) { return spectral_bound(problem.op()); }

/// Radius of the sup-norm ball the trajectory is assumed to stay in when
/// bounding the Lipschitz constant of f.
inline double trust_radius(const ConvexProblem& problem, const TrajectoryState& initial) {
  const double u0 = initial.u.size() ? initial.u.cwiseAbs().maxCoeff() : 0.0;
  const double ubar = problem.minimizer().cwiseAbs().maxCoeff();
  return 2.0 * (u0 + ubar) + 1.0;
}

/// Largest dt with dt * sqrt(lambda_max(A) + Lip(f)) <= 2.8 * margin.
inline double stable_step_limit(const ConvexProblem& problem, const TrajectoryState& initial,
                                double margin) {
  const double stiffness = spectral_bound(problem) +
                           problem.nonlinearity().lipschitz_bound(trust_radius(problem, initial));
  if (stiffness <= 0.0) return std::numeric_limits<double>::infinity();
  return 2.8 * margin / std::sqrt(stiffness);
}

/// Number of RK4 steps; throws unless t_end - t_start is a whole number of
/// sampling intervals dt * sample_stride.
inline std::int64_t step_count(const IntegratorConfig& config, double t_start) {
  if (!(config.dt > 0.0)) throw InputError("integrator: dt must be > 0");
  if (config.sample_stride < 1) throw InputError("integrator: sample_stride must be >= 1");
  if (!(config.stability_margin > 0.0 && config.stability_margin <= 1.0))
    throw InputError("integrator: stability_margin must lie in (0, 1]");
  const double span = config.t_end - t_start;
  if (!(span >= 0.0)) throw InputError("integrator: t_end precedes the initial time");
  const double exact = span / config.dt;
  const auto steps = static_cast<std::int64_t>(std::llround(exact));
  if (std::abs(exact - static_cast<double>(steps)) > 1e-6)
    throw InputError("integrator: (t_end - t0) / dt must be an integer");
  if (steps % config.sample_stride != 0)
    throw InputError("integrator: step count must be a multiple of sample_stride");
  return steps;
}

inline void check_stability(const IntegratorConfig& config, const ConvexProblem& problem,
                            const TrajectoryState& initial) {
  const double limit = stable_step_limit(problem, initial, config.stability_margin);
  if (config.dt > limit * (1.0 + 1e-12)) {
    throw InputError("integrator: dt = " + std::to_string(config.dt) +
                     " violates the RK4 stability guard (limit " + std::to_string(limit) + ")");
  }
}

/// Runs RK4 from `initial` to config.t_end, calling observer(state) on every
/// sampled state (step 0, every sample_stride steps, and the final step).
/// Sample times are t0 + k dt, computed without accumulation.
template <class Observer>
TrajectoryState integrate_with(const IntegratorConfig& config, const System& sys,
                               const TrajectoryState& initial, Observer&& observer) {
  const Eigen::Index n = sys.problem->dimension();
  require_dimension(initial.u, n, "integrate");
  require_dimension(initial.v, n, "integrate");
  if (!initial.u.allFinite() || !initial.v.allFinite())
    throw InputError("integrate: initial state is not finite");
  const std::int64_t steps = step_count(config, initial.t);
  check_stability(config, *sys.problem, initial);

  TrajectoryState state = initial;
  Rk4Stepper stepper(n);
  observer(static_cast<const TrajectoryState&>(state));
  for (std::int64_t k = 0; k < steps; ++k) {
    const double t = initial.t + static_cast<double>(k) * config.dt;
    stepper.advance(sys, t, config.dt, state.u, state.v);
    state.t = initial.t + static_cast<double>(k + 1) * config.dt;
    if (!state.u.allFinite() || !state.v.allFinite()) throw StabilityError(k + 1, state.t);
    if ((k + 1) % config.sample_stride == 0) observer(static_cast<const TrajectoryState&>(state));
  }
  return state;
}

}  // namespace vandamp
