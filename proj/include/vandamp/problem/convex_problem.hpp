#pragma once

// Finite-dimensional convex potentials Phi(v) = 1/2 a(v,v) + F(v) on R^n with
// the weighted inner product <v,w>_H = h * sum v_i w_i, a(v,w) = <Av, w>_H and
// grad_H Phi(v) = Av + f(v).

#include "vandamp/core.hpp"
#include "vandamp/problem/linear_operator.hpp"
#include "vandamp/problem/nonlinearity.hpp"
#include "vandamp/random.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

namespace vandamp {

/// Everything that defines Phi, without the cached minimizer.
struct ProblemSpec {
  SymmetricOperator op;
  Nonlinearity f;
  double mass_weight = 1.0;
  std::string family = "custom";

  Eigen::Index dimension() const { return op.size(); }
  double inner(const Vector& a, const Vector& b) const { return mass_weight * a.dot(b); }
  double h_norm(const Vector& v) const { return std::sqrt(mass_weight * v.squaredNorm()); }

  double phi(const Vector& u) const {
    return 0.5 * inner(op.apply(u), u) + f.potential(u, mass_weight);
  }

  void grad_into(const Vector& u, Vector& out) const {
    op.apply(u, out);
    f.add_to(u, out);
  }

  Vector grad(const Vector& u) const {
    Vector out(u.size());
    grad_into(u, out);
    return out;
  }
};

class MinimizerError : public ConvergenceError {
 public:
  MinimizerError(Vector last_iterate, double gradient_norm)
      : ConvergenceError("compute_minimizer: no convergence, |grad Phi|_H = " +
                         std::to_string(gradient_norm)),
        last_iterate_(std::move(last_iterate)), gradient_norm_(gradient_norm) {}

  const Vector& last_iterate() const { return last_iterate_; }
  double gradient_norm() const { return gradient_norm_; }

 private:
  Vector last_iterate_;
  double gradient_norm_;
};

struct Minimizer {
  Vector point;
  double value = 0.0;
};

/// Gradient descent with Armijo backtracking from u = 0, refined by damped Newton
/// on the componentwise Hessian A + diag(phi'(u_i)). Deterministic.
inline Minimizer compute_minimizer(const ProblemSpec& spec, double tol = 1e-12,
                                   int max_iterations = 500) {
  const Eigen::Index n = spec.dimension();
  Vector u = Vector::Zero(n);
  Vector g = spec.grad(u);
  double value = spec.phi(u);

  auto armijo = [&](const Vector& direction, double slope, Vector& trial, double& trial_value) {
    double step = 1.0;
    for (int k = 0; k < 60; ++k) {
      trial = u + step * direction;
      trial_value = spec.phi(trial);
      if (trial_value <= value + 1e-4 * step * slope) return true;
      step *= 0.5;
    }
    return false;
  };

  Vector trial(n);
  double trial_value = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    const double gnorm = spec.h_norm(g);
    if (gnorm <= tol) return {u, value};

    bool moved = false;
    // Newton direction on the regularised Hessian
    Matrix hessian = spec.op.to_dense();
    hessian.diagonal() += spec.f.jacobian_diagonal(u);
    const double reg = 1e-14 * (1.0 + hessian.diagonal().cwiseAbs().maxCoeff());
    hessian.diagonal().array() += reg;
    Eigen::LDLT<Matrix> ldlt(hessian);
    if (ldlt.info() == Eigen::Success) {
      Vector direction = -ldlt.solve(g);
      const double slope = spec.inner(g, direction);
      if (direction.allFinite() && slope < 0.0) {
        // full step first: near the minimizer Phi changes below roundoff, so a
        // step that halves the gradient is accepted without the decrease test
        trial = u + direction;
        trial_value = spec.phi(trial);
        moved = spec.h_norm(spec.grad(trial)) <= 0.5 * gnorm ||
                trial_value <= value + 1e-4 * slope;
        if (!moved && armijo(direction, slope, trial, trial_value))
          moved = trial_value < value || spec.h_norm(spec.grad(trial)) < gnorm;
      }
    }
    if (!moved) {
      Vector direction = -g;
      const double slope = -gnorm * gnorm;
      if (!armijo(direction, slope, trial, trial_value)) {
        throw MinimizerError(u, gnorm);
      }
    }
    u = trial;
    value = trial_value;
    g = spec.grad(u);
  }
  const double gnorm = spec.h_norm(g);
  if (gnorm <= tol) return {u, value};
  throw MinimizerError(u, gnorm);
}

struct ProblemValidation {
  bool symmetric = true;
  bool positive = true;
  bool convex = true;
  bool minimizer_ok = true;
  bool semi_coercive = true;
  bool all() const { return symmetric && positive && convex && minimizer_ok && semi_coercive; }
};

class ConvexProblem {
 public:
  static constexpr double default_minimizer_tol = 1e-12;

  explicit ConvexProblem(ProblemSpec spec, double minimizer_tol = default_minimizer_tol)
      : spec_(std::move(spec)), minimizer_tol_(minimizer_tol) {
    if (!(spec_.mass_weight > 0.0)) throw InputError("problem: mass weight must be > 0");
    if (spec_.f.linear_term().size() != 0 && spec_.f.linear_term().size() != spec_.dimension())
      throw InputError("problem: linear term has the wrong dimension");
    Minimizer m = compute_minimizer(spec_, minimizer_tol);
    minimizer_ = std::move(m.point);
    phi_star_ = m.value;
    const ProblemValidation report = validate(16, 0x5eed);
    if (!report.all()) {
      std::string what = "problem: validation failed:";
      if (!report.symmetric) what += " symmetry";
      if (!report.positive) what += " positivity";
      if (!report.convex) what += " convexity";
      if (!report.minimizer_ok) what += " minimizer";
      if (!report.semi_coercive) what += " semi-coercivity";
      throw InputError(what);
    }
  }

  Eigen::Index dimension() const { return spec_.dimension(); }
  double mass_weight() const { return spec_.mass_weight; }
  const SymmetricOperator& op() const { return spec_.op; }
  const Nonlinearity& nonlinearity() const { return spec_.f; }
  const ProblemSpec& spec() const { return spec_; }
  const std::string& family() const { return spec_.family; }
  const Vector& minimizer() const { return minimizer_; }
  double phi_star() const { return phi_star_; }
  double minimizer_tol() const { return minimizer_tol_; }

  // a(v,v) + lambda |v|^2 >= mu ||v||_V^2 with ||v||_V^2 = a(v,v) + |v|^2
  double semi_coercivity_lambda() const { return 1.0; }
  double semi_coercivity_mu() const { return 1.0; }

  bool is_even() const { return spec_.f.is_odd(); }

  /// True when arg min Phi has nonempty interior (flat basin with A = 0).
  bool has_interior_minimizers() const {
    return spec_.f.map().kind == ScalarMap::Kind::flat_basin && spec_.f.map().width > 0.0 &&
           !spec_.f.has_linear_term() && spec_.op.to_dense().isZero(0.0);
  }

  double inner(const Vector& a, const Vector& b) const { return spec_.inner(a, b); }
  double h_norm(const Vector& v) const { return spec_.h_norm(v); }

  /// a(v, w) = <Av, w>_H
  double bilinear(const Vector& v, const Vector& w) const { return inner(spec_.op.apply(v), w); }

  double F(const Vector& v) const { return spec_.f.potential(v, spec_.mass_weight); }

  ProblemValidation validate(int samples, std::uint64_t seed) const {
    ProblemValidation r;
    SplitMix64 rng(seed);
    const Eigen::Index n = dimension();
    const Matrix abs_a = spec_.op.to_dense().cwiseAbs();
    const double scale = 1.0 + abs_a.maxCoeff();
    for (int s = 0; s < samples; ++s) {
      const Vector v = rng.normal_vector(n);
      const Vector w = rng.normal_vector(n);
      const double avw = bilinear(v, w);
      const double vaw = bilinear(w, v);
      const double mag = inner(v.cwiseAbs(), (abs_a * w.cwiseAbs()));
      if (std::abs(avw - vaw) > 1e-12 * (mag + 1.0)) r.symmetric = false;
      if (bilinear(v, v) < -1e-12 * scale * inner(v, v)) r.positive = false;
      const double fmid = F(0.5 * (v + w));
      const double favg = 0.5 * (F(v) + F(w));
      if (fmid > favg + 1e-12 * (1.0 + std::abs(favg))) r.convex = false;
      const double lhs = bilinear(v, v) + semi_coercivity_lambda() * inner(v, v);
      const double vnorm2 = bilinear(v, v) + inner(v, v);
      if (lhs < semi_coercivity_mu() * vnorm2 * (1.0 - 1e-12)) r.semi_coercive = false;
    }
    if (h_norm(spec_.grad(minimizer_)) > minimizer_tol_) r.minimizer_ok = false;
    if (std::abs(spec_.phi(minimizer_) - phi_star_) > 1e-12 * (1.0 + std::abs(phi_star_)))
      r.minimizer_ok = false;
    return r;
  }

 private:
  ProblemSpec spec_;
  double minimizer_tol_;
  Vector minimizer_;
  double phi_star_ = 0.0;
};

inline double phi(const ConvexProblem& problem, const Vector& u) {
  require_dimension(u, problem.dimension(), "phi");
  return problem.spec().phi(u);
}

inline Vector grad_phi(const ConvexProblem& problem, const Vector& u) {
  require_dimension(u, problem.dimension(), "grad_phi");
  return problem.spec().grad(u);
}

// --- problem families -------------------------------------------------------

/// Dense A = Q diag(lambda) Q^T with eigenvalues evenly spaced in [lambda_min,
/// lambda_max] and Q a Householder reflection drawn from `seed`.
inline Matrix rotated_diagonal(Eigen::Index n, double lambda_min, double lambda_max,
                               std::uint64_t seed) {
  if (!(lambda_min >= 0.0) || !(lambda_max >= lambda_min))
    throw InputError("quadratic: need 0 <= lambda_min <= lambda_max");
  Vector eig(n);
  for (Eigen::Index i = 0; i < n; ++i)
    eig[i] = n == 1 ? lambda_min
                    : lambda_min + (lambda_max - lambda_min) * static_cast<double>(i) /
                                       static_cast<double>(n - 1);
  if (n == 1) return eig.asDiagonal();
  SplitMix64 rng(seed);
  const Vector w = random_unit_vector(rng, n);
  const Matrix q = Matrix::Identity(n, n) - 2.0 * w * w.transpose();
  Matrix a = q * eig.asDiagonal() * q.transpose();
  return 0.5 * (a + a.transpose());
}

/// Phi(v) = 1/2 <A(v - c), v - c> + const, minimizer c = shift * (seeded unit direction).
inline ConvexProblem make_quadratic(Eigen::Index n, double lambda_min, double lambda_max,
                                    std::uint64_t seed, double shift = 0.0) {
  if (n < 1) throw InputError("quadratic: dimension must be >= 1");
  if (shift != 0.0 && !(lambda_min > 0.0))
    throw InputError("quadratic: a shifted minimizer needs lambda_min > 0");
  Matrix a = rotated_diagonal(n, lambda_min, lambda_max, seed);
  Nonlinearity f;
  if (shift != 0.0) {
    SplitMix64 rng(seed ^ 0xc0ffeeULL);
    const Vector center = shift * random_unit_vector(rng, n);
    f = Nonlinearity(ScalarMap::none(), a * center);
  }
  return ConvexProblem(ProblemSpec{SymmetricOperator::dense(std::move(a)), std::move(f), 1.0,
                                   "quadratic"});
}

/// Quadratic part plus F(v) = coefficient * sum (v_i - shift)^4 / 4. Even when shift = 0.
inline ConvexProblem make_shifted_quartic(Eigen::Index n, double lambda_min, double lambda_max,
                                          std::uint64_t seed, double shift, double coefficient) {
  if (n < 1) throw InputError("shifted_quartic: dimension must be >= 1");
  if (!(coefficient >= 0.0)) throw InputError("shifted_quartic: coefficient must be >= 0");
  Matrix a = rotated_diagonal(n, lambda_min, lambda_max, seed);
  return ConvexProblem(ProblemSpec{SymmetricOperator::dense(std::move(a)),
                                   Nonlinearity(ScalarMap::cubic(coefficient, shift)), 1.0,
                                   "shifted_quartic"});
}

/// A = 0, F(v) = coefficient * sum max(|v_i| - width, 0)^2. C^1, convex, arg min = [-w, w]^n.
inline ConvexProblem make_flat_basin(Eigen::Index n, double width, double coefficient = 1.0) {
  if (n < 1) throw InputError("flat_basin: dimension must be >= 1");
  if (!(width > 0.0) || !(coefficient > 0.0))
    throw InputError("flat_basin: width and coefficient must be > 0");
  return ConvexProblem(ProblemSpec{SymmetricOperator::zero(n),
                                   Nonlinearity(ScalarMap::basin(coefficient, width)), 1.0,
                                   "flat_basin"});
}

/// Finite-difference discretisation of u_tt + gamma u_t - u_xx + f(u) = g on
/// (0, 1) with u = 0 at both ends: n interior nodes, h = 1/(n+1),
/// A = h^-2 tridiag(-1, 2, -1), <v,w>_H = h sum v_i w_i, F(v) = h sum F_s(v_i).
inline ConvexProblem build_wave_problem(Eigen::Index n_interior, const ScalarMap& f) {
  if (n_interior < 2) throw InputError("wave: need at least 2 interior nodes");
  if (std::abs(f.value(0.0)) > 1e-14) throw InputError("wave: nonlinearity must satisfy f(0) = 0");
  double previous = f.value(-10.0);
  for (int k = 1; k <= 2000; ++k) {
    const double s = -10.0 + 0.01 * k;
    const double current = f.value(s);
    if (current < previous) throw InputError("wave: nonlinearity must be nondecreasing");
    previous = current;
  }
  const double h = 1.0 / static_cast<double>(n_interior + 1);
  const double inv_h2 = 1.0 / (h * h);
  SymmetricOperator op =
      SymmetricOperator::tridiagonal(Vector::Constant(n_interior, 2.0 * inv_h2),
                                     Vector::Constant(n_interior - 1, -inv_h2))
          .with_known_spectral_bound(4.0 * inv_h2);
  return ConvexProblem(ProblemSpec{std::move(op), Nonlinearity(f), h, "wave"});
}

/// Interior node coordinates x_i = i h of the wave discretisation.
inline Vector wave_nodes(Eigen::Index n_interior) {
  const double h = 1.0 / static_cast<double>(n_interior + 1);
  Vector x(n_interior);
  for (Eigen::Index i = 0; i < n_interior; ++i) x[i] = static_cast<double>(i + 1) * h;
  return x;
}

}  // namespace vandamp
