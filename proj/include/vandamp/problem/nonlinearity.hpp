#pragma once

#include "vandamp/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vandamp {

/// Scalar map s -> phi(s) applied componentwise, with its antiderivative and derivative.
struct ScalarMap {
  enum class Kind {
    zero,
    linear,       // c s
    cubic,        // c (s - shift)^3
    flat_basin,   // 2c (|s| - width)_+ sign(s), antiderivative c (|s| - width)_+^2
  };

  Kind kind = Kind::zero;
  double coefficient = 0.0;
  double shift = 0.0;
  double width = 0.0;

  static ScalarMap none() { return {}; }
  static ScalarMap linear(double c) { return {Kind::linear, c, 0.0, 0.0}; }
  static ScalarMap cubic(double c, double shift = 0.0) { return {Kind::cubic, c, shift, 0.0}; }
  static ScalarMap basin(double c, double width) { return {Kind::flat_basin, c, 0.0, width}; }

  double value(double s) const {
    switch (kind) {
      case Kind::zero: return 0.0;
      case Kind::linear: return coefficient * s;
      case Kind::cubic: {
        const double d = s - shift;
        return coefficient * d * d * d;
      }
      case Kind::flat_basin: {
        const double excess = std::abs(s) - width;
        return excess > 0.0 ? std::copysign(2.0 * coefficient * excess, s) : 0.0;
      }
    }
    return 0.0;
  }

  /// Antiderivative normalised so that its minimum over R is the value at the
  /// map's natural zero (0 for linear and basin, `shift` for cubic).
  double antiderivative(double s) const {
    switch (kind) {
      case Kind::zero: return 0.0;
      case Kind::linear: return 0.5 * coefficient * s * s;
      case Kind::cubic: {
        const double d2 = (s - shift) * (s - shift);
        return 0.25 * coefficient * d2 * d2;
      }
      case Kind::flat_basin: {
        const double excess = std::max(std::abs(s) - width, 0.0);
        return coefficient * excess * excess;
      }
    }
    return 0.0;
  }

  double derivative(double s) const {
    switch (kind) {
      case Kind::zero: return 0.0;
      case Kind::linear: return coefficient;
      case Kind::cubic: return 3.0 * coefficient * (s - shift) * (s - shift);
      case Kind::flat_basin: return std::abs(s) > width ? 2.0 * coefficient : 0.0;
    }
    return 0.0;
  }

  /// sup |phi'(s)| over |s| <= radius.
  double lipschitz_bound(double radius) const {
    switch (kind) {
      case Kind::zero: return 0.0;
      case Kind::linear: return std::abs(coefficient);
      case Kind::cubic: {
        const double reach = radius + std::abs(shift);
        return 3.0 * std::abs(coefficient) * reach * reach;
      }
      case Kind::flat_basin: return 2.0 * std::abs(coefficient);
    }
    return 0.0;
  }

  bool is_odd() const { return kind != Kind::cubic || shift == 0.0; }
  bool is_zero() const { return kind == Kind::zero || coefficient == 0.0; }

  std::string describe() const {
    switch (kind) {
      case Kind::zero: return "0";
      case Kind::linear: return std::to_string(coefficient) + "*s";
      case Kind::cubic: return std::to_string(coefficient) + "*(s-" + std::to_string(shift) + ")^3";
      case Kind::flat_basin:
        return "basin(c=" + std::to_string(coefficient) + ", w=" + std::to_string(width) + ")";
    }
    return "?";
  }
};

/// Nonlinear part of the gradient: f(v)_i = phi(v_i) - b_i, with potential
/// F(v) = h * sum_i (Phi_scalar(v_i) - b_i v_i) so that grad_H F = f.
class Nonlinearity {
 public:
  Nonlinearity() = default;
  explicit Nonlinearity(ScalarMap map) : map_(map) {}
  Nonlinearity(ScalarMap map, Vector linear_term) : map_(map), b_(std::move(linear_term)) {}

  const ScalarMap& map() const { return map_; }
  bool has_linear_term() const { return b_.size() > 0 && b_.squaredNorm() > 0.0; }
  const Vector& linear_term() const { return b_; }

  void apply(const Vector& v, Vector& out) const {
    if (map_.is_zero()) {
      out.setZero();
    } else {
      for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = map_.value(v[i]);
    }
    if (b_.size() > 0) out -= b_;
  }

  /// Adds f(v) into out.
  void add_to(const Vector& v, Vector& out) const {
    if (!map_.is_zero())
      for (Eigen::Index i = 0; i < v.size(); ++i) out[i] += map_.value(v[i]);
    if (b_.size() > 0) out -= b_;
  }

  double potential(const Vector& v, double mass_weight) const {
    double sum = 0.0;
    if (!map_.is_zero())
      for (Eigen::Index i = 0; i < v.size(); ++i) sum += map_.antiderivative(v[i]);
    if (b_.size() > 0) sum -= b_.dot(v);
    return mass_weight * sum;
  }

  /// Diagonal of the Jacobian of f (the linear term has none).
  Vector jacobian_diagonal(const Vector& v) const {
    Vector d(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) d[i] = map_.derivative(v[i]);
    return d;
  }

  double lipschitz_bound(double radius) const { return map_.lipschitz_bound(radius); }

  bool is_odd() const { return map_.is_odd() && !has_linear_term(); }

 private:
  ScalarMap map_;
  Vector b_;
};

}  // namespace vandamp
