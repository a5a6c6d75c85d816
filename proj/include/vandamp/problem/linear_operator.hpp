#pragma once

#include "vandamp/core.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <utility>

namespace vandamp {

/// Symmetric positive-semidefinite matrix stored either densely or as a
/// symmetric tridiagonal (diagonal + first off-diagonal).
class SymmetricOperator {
 public:
  enum class Storage { dense, tridiagonal };

  static SymmetricOperator dense(Matrix m) {
    if (m.rows() != m.cols() || m.rows() == 0) throw InputError("operator: matrix must be square");
    SymmetricOperator op;
    op.storage_ = Storage::dense;
    op.dense_ = std::move(m);
    return op;
  }

  static SymmetricOperator tridiagonal(Vector diag, Vector off) {
    if (diag.size() == 0 || off.size() != diag.size() - 1)
      throw InputError("operator: tridiagonal needs n diagonal and n-1 off-diagonal entries");
    SymmetricOperator op;
    op.storage_ = Storage::tridiagonal;
    op.diag_ = std::move(diag);
    op.off_ = std::move(off);
    return op;
  }

  static SymmetricOperator zero(Eigen::Index n) {
    return tridiagonal(Vector::Zero(n), Vector::Zero(n - 1));
  }

  static SymmetricOperator identity(Eigen::Index n) {
    return tridiagonal(Vector::Ones(n), Vector::Zero(n - 1));
  }

  Storage storage() const { return storage_; }
  Eigen::Index size() const { return storage_ == Storage::dense ? dense_.rows() : diag_.size(); }

  /// out = A v, out must already have the right size and must not alias v.
  void apply(const Vector& v, Vector& out) const {
    if (storage_ == Storage::dense) {
      out.noalias() = dense_ * v;
      return;
    }
    const Eigen::Index n = diag_.size();
    for (Eigen::Index i = 0; i < n; ++i) {
      double s = diag_[i] * v[i];
      if (i > 0) s += off_[i - 1] * v[i - 1];
      if (i + 1 < n) s += off_[i] * v[i + 1];
      out[i] = s;
    }
  }

  Vector apply(const Vector& v) const {
    Vector out(size());
    apply(v, out);
    return out;
  }

  Matrix to_dense() const {
    if (storage_ == Storage::dense) return dense_;
    const Eigen::Index n = diag_.size();
    Matrix m = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      m(i, i) = diag_[i];
      if (i + 1 < n) m(i, i + 1) = m(i + 1, i) = off_[i];
    }
    return m;
  }

  const Vector& diagonal() const { return diag_; }
  const Vector& off_diagonal() const { return off_; }

  /// Exact upper bound on the spectrum when the caller knows one (discrete Laplacian).
  std::optional<double> known_spectral_bound() const { return known_bound_; }
  SymmetricOperator with_known_spectral_bound(double bound) const {
    SymmetricOperator copy = *this;
    copy.known_bound_ = bound;
    return copy;
  }

 private:
  SymmetricOperator() = default;

  Storage storage_ = Storage::dense;
  Matrix dense_;
  Vector diag_;
  Vector off_;
  std::optional<double> known_bound_;
};

/// Factorization of A + shift*I (shift > 0 so the matrix is SPD when A is PSD).
class ShiftedSolver {
 public:
  ShiftedSolver(const SymmetricOperator& op, double shift) : op_(op), shift_(shift) {
    if (op.storage() == SymmetricOperator::Storage::dense) {
      Matrix m = op.to_dense();
      m.diagonal().array() += shift;
      llt_.compute(m);
      if (llt_.info() != Eigen::Success)
        throw ConvergenceError("shifted solve: Cholesky factorization failed (A not PSD?)");
    } else {
      // LDL^T of the symmetric tridiagonal matrix
      const Eigen::Index n = op.size();
      d_.resize(n);
      l_.resize(n > 1 ? n - 1 : 0);
      d_[0] = op.diagonal()[0] + shift;
      for (Eigen::Index i = 1; i < n; ++i) {
        if (!(d_[i - 1] > 0.0))
          throw ConvergenceError("shifted solve: nonpositive pivot (A not PSD?)");
        l_[i - 1] = op.off_diagonal()[i - 1] / d_[i - 1];
        d_[i] = op.diagonal()[i] + shift - l_[i - 1] * op.off_diagonal()[i - 1];
      }
      if (!(d_[n - 1] > 0.0)) throw ConvergenceError("shifted solve: nonpositive pivot");
    }
  }

  /// Solves (A + shift I) w = v and checks the relative residual against rel_tol.
  Vector solve(const Vector& v, double rel_tol = 1e-10) const {
    Vector w;
    if (op_.storage() == SymmetricOperator::Storage::dense) {
      w = llt_.solve(v);
    } else {
      const Eigen::Index n = v.size();
      w = v;
      for (Eigen::Index i = 1; i < n; ++i) w[i] -= l_[i - 1] * w[i - 1];
      for (Eigen::Index i = 0; i < n; ++i) w[i] /= d_[i];
      for (Eigen::Index i = n - 2; i >= 0; --i) w[i] -= l_[i] * w[i + 1];
    }
    Vector residual = op_.apply(w);
    residual += shift_ * w - v;
    const double scale = v.norm();
    if (!w.allFinite() || residual.norm() > rel_tol * scale + 1e-300) {
      throw ConvergenceError("shifted solve: relative residual " +
                             std::to_string(scale > 0 ? residual.norm() / scale : residual.norm()) +
                             " exceeds tolerance");
    }
    return w;
  }

 private:
  SymmetricOperator op_;
  double shift_;
  Eigen::LLT<Matrix> llt_;
  Vector d_;
  Vector l_;
};

/// Upper estimate of lambda_max(A): the exact bound when the operator carries
/// one, otherwise the Rayleigh quotient after power iteration inflated by 10%.
inline double spectral_bound(const SymmetricOperator& op, int max_iterations = 200,
                             double tol = 1e-6) {
  if (auto known = op.known_spectral_bound()) return *known;
  const Eigen::Index n = op.size();
  Vector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = 1.0 + 0.1 * std::sin(1.0 + static_cast<double>(i));
  x.normalize();
  Vector y(n);
  double rayleigh = 0.0;
  for (int k = 0; k < max_iterations; ++k) {
    op.apply(x, y);
    const double next = x.dot(y);
    const double norm = y.norm();
    if (norm == 0.0) return 0.0;
    x = y / norm;
    const bool converged = std::abs(next - rayleigh) <= tol * std::abs(next);
    rayleigh = next;
    if (converged) break;
  }
  return 1.1 * std::max(rayleigh, 0.0);
}

}  // namespace vandamp
