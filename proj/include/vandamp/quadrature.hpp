#pragma once

#include "vandamp/core.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace vandamp::quad {

/// Adaptive 61-point Gauss-Kronrod on a finite interval.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-12, unsigned max_depth = 20) {
  if (b <= a) return 0.0;
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, max_depth, rel_tol,
                                                                       &error);
}

/// Integrates f over [a, b] in consecutive pieces of length `piece`. Used for
/// integrands with kinks or oscillation on a known scale (|sin|, tabulated data).
template <class F>
double integrate_pieces(F&& f, double a, double b, double piece, double rel_tol = 1e-12) {
  if (b <= a) return 0.0;
  double sum = 0.0;
  double lo = a;
  while (lo < b) {
    const double hi = std::min(b, lo + piece);
    sum += integrate(f, lo, hi, rel_tol, 8);
    lo = hi;
  }
  return sum;
}

/// Integral over [a, b] split on geometrically growing pieces [a, a+1], [a+1, a+3], ...
/// Stops early once `tail(x)` (an upper bound on the integral over [x, inf)) drops
/// below abs_floor; the skipped remainder is then below that floor.
template <class F, class Tail>
double integrate_geometric(F&& f, double a, double b, Tail&& tail, double rel_tol = 1e-12,
                           double abs_floor = 0.0) {
  double sum = 0.0;
  double lo = a;
  double width = 1.0;
  while (lo < b) {
    const double hi = std::min(b, lo + width);
    sum += integrate(f, lo, hi, rel_tol, 15);
    lo = hi;
    width *= 2.0;
    if (abs_floor > 0.0 && lo < b && tail(lo) <= abs_floor) break;
  }
  return sum;
}

}  // namespace vandamp::quad
