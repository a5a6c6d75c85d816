#pragma once

// The three norms of the embedding chain V -> H -> V' on R^n, built from the
// shift operator S = A + I:
//   |v|_H^2   = <v, v>_H
//   ||v||_V^2 = a(v, v) + |v|_H^2 = <S v, v>_H
//   ||v||_V'^2 = <S^-1 v, v>_H          (dual of ||.||_V through the H pairing)

#include "vandamp/core.hpp"
#include "vandamp/problem/convex_problem.hpp"
#include "vandamp/random.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace vandamp {

class NormTriple {
 public:
  explicit NormTriple(const ConvexProblem& problem, double solve_tol = 1e-10)
      : op_(problem.op()), h_(problem.mass_weight()), solver_(problem.op(), 1.0),
        solve_tol_(solve_tol) {}

  Eigen::Index dimension() const { return op_.size(); }
  double mass_weight() const { return h_; }
  const SymmetricOperator& op() const { return op_; }

  double h_norm(const Vector& v) const { return std::sqrt(h_ * v.squaredNorm()); }

  double v_norm(const Vector& v) const {
    require_dimension(v, dimension(), "v_norm");
    const double a = h_ * op_.apply(v).dot(v);
    return std::sqrt(std::max(a, 0.0) + h_ * v.squaredNorm());
  }

  double vprime_norm(const Vector& v) const {
    require_dimension(v, dimension(), "vprime_norm");
    if (v.squaredNorm() == 0.0) return 0.0;
    const Vector w = solver_.solve(v, solve_tol_);
    return std::sqrt(std::max(h_ * w.dot(v), 0.0));
  }

 private:
  SymmetricOperator op_;
  double h_;
  ShiftedSolver solver_;
  double solve_tol_;
};

inline double v_norm(const NormTriple& norms, const Vector& v) { return norms.v_norm(v); }
inline double vprime_norm(const NormTriple& norms, const Vector& v) { return norms.vprime_norm(v); }

/// |v|_H / (||v||_V'^(1/2) ||v||_V^(1/2)) for nonzero v.
inline double interpolation_ratio(const NormTriple& norms, const Vector& v) {
  const double denom = std::sqrt(norms.vprime_norm(v) * norms.v_norm(v));
  return norms.h_norm(v) / denom;
}

/// Empirical constant C in |v| <= C ||v||_V'^(1/2) ||v||_V^(1/2): the largest
/// ratio over m seeded random directions and every eigenvector of A.
inline double interpolation_constant(const NormTriple& norms, int samples,
                                     std::uint64_t seed = 0x1badb002ULL) {
  if (samples < 1) throw InputError("interpolation_constant: need at least one sample");
  const Eigen::Index n = norms.dimension();
  double worst = 0.0;
  SplitMix64 rng(seed);
  for (int s = 0; s < samples; ++s) {
    const Vector v = random_unit_vector(rng, n, norms.mass_weight());
    worst = std::max(worst, interpolation_ratio(norms, v));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig;
  if (norms.op().storage() == SymmetricOperator::Storage::tridiagonal) {
    eig.computeFromTridiagonal(norms.op().diagonal(), norms.op().off_diagonal());
  } else {
    eig.compute(norms.op().to_dense());
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    worst = std::max(worst, interpolation_ratio(norms, eig.eigenvectors().col(k)));
  }
  return worst;
}

}  // namespace vandamp
