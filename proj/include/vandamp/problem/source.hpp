#pragma once

// Source terms g(t) = c * envelope(t) * direction with |direction|_H = 1, and the
// analytic bookkeeping of their weighted integrals  int_0^inf (1+t)^r |g(t)|^p dt,
// which decide every integrability hypothesis the convergence theorems use.

#include "vandamp/core.hpp"
#include "vandamp/problem/damping.hpp"
#include "vandamp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

namespace vandamp {

class SourceTerm {
 public:
  enum class Family { zero, power_decay, exp_decay, modulated_power };

  static SourceTerm zero(Eigen::Index n) {
    SourceTerm s;
    s.direction_ = Vector::Zero(n);
    return s;
  }

  /// |g(t)|_H = c (1+t)^-beta
  static SourceTerm power_decay(const Vector& direction, double mass_weight, double c, double beta) {
    if (!(beta > 0.0)) throw InputError("source: beta must be > 0");
    return SourceTerm(Family::power_decay, direction, mass_weight, c, beta, 0.0, 0.0);
  }

  /// |g(t)|_H = c exp(-rate t)
  static SourceTerm exp_decay(const Vector& direction, double mass_weight, double c, double rate) {
    if (!(rate > 0.0)) throw InputError("source: rate must be > 0");
    return SourceTerm(Family::exp_decay, direction, mass_weight, c, 0.0, rate, 0.0);
  }

  /// g(t) = c (1+t)^-beta sin(omega t) direction
  static SourceTerm modulated_power(const Vector& direction, double mass_weight, double c,
                                    double beta, double omega) {
    if (!(beta > 0.0)) throw InputError("source: beta must be > 0");
    if (!(omega > 0.0)) throw InputError("source: modulation frequency must be > 0");
    return SourceTerm(Family::modulated_power, direction, mass_weight, c, beta, 0.0, omega);
  }

  Family family() const { return family_; }
  double amplitude() const { return c_; }
  double beta() const { return beta_; }
  double rate() const { return rate_; }
  double frequency() const { return omega_; }
  const Vector& direction() const { return direction_; }
  Eigen::Index dimension() const { return direction_.size(); }
  bool is_zero() const { return family_ == Family::zero || c_ == 0.0; }

  /// Signed scalar factor s(t) with g(t) = s(t) * direction.
  double factor(double t) const {
    switch (family_) {
      case Family::zero: return 0.0;
      case Family::power_decay: return c_ * std::pow(1.0 + t, -beta_);
      case Family::exp_decay: return c_ * std::exp(-rate_ * t);
      case Family::modulated_power: return c_ * std::pow(1.0 + t, -beta_) * std::sin(omega_ * t);
    }
    return 0.0;
  }

  /// |g(t)|_H
  double norm(double t) const { return std::abs(factor(t)); }

  void eval_into(double t, Vector& out) const {
    if (is_zero()) {
      out.setZero();
      return;
    }
    out = factor(t) * direction_;
  }

  Vector operator()(double t) const {
    Vector out(direction_.size());
    eval_into(t, out);
    return out;
  }

 private:
  SourceTerm() = default;
  SourceTerm(Family family, const Vector& direction, double mass_weight, double c, double beta,
             double rate, double omega)
      : family_(family), c_(c), beta_(beta), rate_(rate), omega_(omega) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw InputError("source: amplitude must be >= 0");
    const double norm = std::sqrt(mass_weight * direction.squaredNorm());
    if (!(norm > 0.0)) throw InputError("source: direction must be nonzero");
    direction_ = direction / norm;
  }

  Family family_ = Family::zero;
  double c_ = 0.0;
  double beta_ = 0.0;
  double rate_ = 0.0;
  double omega_ = 0.0;
  Vector direction_;
};

inline Vector source_eval(const SourceTerm& source, double t) {
  if (!(t >= 0.0)) throw PreconditionError("source_eval: t must be >= 0");
  return source(t);
}

inline std::string to_string(SourceTerm::Family family) {
  switch (family) {
    case SourceTerm::Family::zero: return "zero";
    case SourceTerm::Family::power_decay: return "power_decay";
    case SourceTerm::Family::exp_decay: return "exp_decay";
    case SourceTerm::Family::modulated_power: return "modulated_power";
  }
  return "?";
}

/// Whether int_0^inf (1+t)^r |g(t)|^p dt is finite, decided from the family exponents.
inline bool weighted_integral_finite(const SourceTerm& source, double r, int p) {
  switch (source.family()) {
    case SourceTerm::Family::zero:
    case SourceTerm::Family::exp_decay: return true;
    case SourceTerm::Family::power_decay:
    case SourceTerm::Family::modulated_power:
      // |sin|^p has a positive mean, so the modulated family behaves like its envelope
      return source.amplitude() == 0.0 || r - p * source.beta() < -1.0;
  }
  return false;
}

struct SourceClassification {
  double alpha = 0.0;
  bool op = false;          // int (1+t)^alpha |g| < inf
  bool square_th2 = false;  // int (1+t)^{3 alpha} |g|^2 < inf
  bool square_th3 = false;  // int (1+t)^{2 alpha + 1} |g|^2 < inf
  // Supremum of admissible nu for the weighted decay rate: nu in [0, 1+alpha)
  // with int (1+t)^{nu/2} |g| < inf. Never attained (open bound); empty when no nu >= 0 qualifies.
  std::optional<double> nu_max;
  bool nu_max_attained = false;

  /// int (1+t)^{nu/2} |g| < inf and nu in [0, 1+alpha)
  bool nu_admissible(double nu) const {
    return nu >= 0.0 && nu < 1.0 + alpha && nu_max && (nu < *nu_max);
  }
};

inline SourceClassification classify_source(const DampingSchedule& schedule, const SourceTerm& source) {
  SourceClassification c;
  const double a = schedule.alpha();
  c.alpha = a;
  c.op = weighted_integral_finite(source, a, 1);
  c.square_th2 = weighted_integral_finite(source, 3.0 * a, 2);
  c.square_th3 = weighted_integral_finite(source, 2.0 * a + 1.0, 2);
  const bool decays_fast = source.family() == SourceTerm::Family::zero ||
                           source.family() == SourceTerm::Family::exp_decay ||
                           source.amplitude() == 0.0;
  if (decays_fast) {
    c.nu_max = 1.0 + a;
  } else {
    const double from_source = 2.0 * (source.beta() - 1.0);
    if (from_source > 0.0) c.nu_max = std::min(1.0 + a, from_source);
  }
  return c;
}

struct WeightedIntegral {
  double value = 0.0;  // integral over [0, T]
  double tail_bound = 0.0;  // upper bound on the integral over [T, inf); exact for power families
  bool divergent = false;
};

namespace detail {

// Upper bound on int_T^inf (1+t)^r exp(-k t) dt, k > 0.
inline double exp_weight_tail(double r, double k, double T) {
  if (r <= 0.0) return std::pow(1.0 + T, r) * std::exp(-k * T) / k;
  if (k * (1.0 + T) > 2.0 * r) return std::pow(1.0 + T, r) * std::exp(-k * T) / (k - r / (1.0 + T));
  const double T2 = 2.0 * r / k;  // here k (1 + T2) > 2r
  const double head =
      quad::integrate([&](double t) { return std::pow(1.0 + t, r) * std::exp(-k * t); }, T, T2);
  return head + std::pow(1.0 + T2, r) * std::exp(-k * T2) / (k - r / (1.0 + T2));
}

}  // namespace detail

/// int_0^T (1+t)^r |g(t)|^p dt for p in {1, 2}. Closed form for zero/power
/// families; adaptive quadrature (relative error well below 1e-8) otherwise.
/// Divergent integrals are flagged and the finite-horizon value is still returned.
inline WeightedIntegral source_weighted_integral(const SourceTerm& source, double r, int p, double T) {
  if (p != 1 && p != 2) throw InputError("source_weighted_integral: p must be 1 or 2");
  if (!(T > 0.0)) throw PreconditionError("source_weighted_integral: T must be > 0");
  WeightedIntegral out;
  if (source.is_zero()) return out;
  const double cp = std::pow(source.amplitude(), p);
  out.divergent = !weighted_integral_finite(source, r, p);
  const double inf = std::numeric_limits<double>::infinity();

  switch (source.family()) {
    case SourceTerm::Family::zero: return out;
    case SourceTerm::Family::power_decay: {
      const double e = r - p * source.beta();
      if (e == -1.0) {
        out.value = cp * std::log1p(T);
      } else {
        out.value = cp * std::expm1((e + 1.0) * std::log1p(T)) / (e + 1.0);
      }
      out.tail_bound = out.divergent ? inf : cp * std::pow(1.0 + T, e + 1.0) / (-e - 1.0);
      return out;
    }
    case SourceTerm::Family::exp_decay: {
      const double k = p * source.rate();
      auto integrand = [&](double t) { return std::pow(1.0 + t, r) * std::exp(-k * t); };
      auto tail = [&](double t) { return detail::exp_weight_tail(r, k, t); };
      const double floor = 1e-17 * detail::exp_weight_tail(r, k, 0.0);
      out.value = cp * quad::integrate_geometric(integrand, 0.0, T, tail, 1e-12, floor);
      out.tail_bound = cp * tail(T);
      return out;
    }
    case SourceTerm::Family::modulated_power: {
      const double e = r - p * source.beta();
      const double w = source.frequency();
      auto integrand = [&](double t) {
        return std::pow(1.0 + t, e) * std::pow(std::abs(std::sin(w * t)), p);
      };
      out.value = cp * quad::integrate_pieces(integrand, 0.0, T, std::numbers::pi / w, 1e-10);
      out.tail_bound = out.divergent ? inf : cp * std::pow(1.0 + T, e + 1.0) / (-e - 1.0);
      return out;
    }
  }
  return out;
}

}  // namespace vandamp
