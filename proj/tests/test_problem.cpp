#include <catch_amalgamated.hpp>

#include "vandamp/problem/convex_problem.hpp"
#include "vandamp/problem/damping.hpp"
#include "vandamp/problem/norms.hpp"
#include "vandamp/problem/source.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

using namespace vandamp;
using Catch::Approx;

namespace {

ConvexProblem scalar(double a, ScalarMap f = ScalarMap::none()) {
  Matrix m(1, 1);
  m(0, 0) = a;
  return ConvexProblem(ProblemSpec{SymmetricOperator::dense(m), Nonlinearity(f), 1.0, "scalar"});
}

Vector vec1(double x) { return Vector::Constant(1, x); }

// Independent oracle: root of a monotone scalar function by bisection.
double bisect(auto f, double lo, double hi) {
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    if ((f(lo) < 0) == (f(mid) < 0)) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("gamma_eval on power schedules") {
  CHECK(gamma_eval(DampingSchedule::power(1, 0.5), 0.0) == 1.0);
  CHECK(gamma_eval(DampingSchedule::power(1, 0.5), 3.0) == Approx(0.5).epsilon(1e-15));
  CHECK(gamma_eval(DampingSchedule::power(2, 0.0), 10.0) == 2.0);
  CHECK(gamma_eval(DampingSchedule::scaled_power(1, 0.3, 2.0), 0.0) == 2.0);
  CHECK_THROWS_AS(gamma_eval(DampingSchedule::power(1, 0.5), -1.0), PreconditionError);
}

TEST_CASE("damping schedules reject bad parameters") {
  CHECK_THROWS_AS(DampingSchedule::power(1.0, 1.0), InputError);
  CHECK_THROWS_AS(DampingSchedule::power(0.0, 0.5), InputError);
  CHECK_THROWS_AS(DampingSchedule::power(1.0, -0.1), InputError);
  CHECK_THROWS_AS(DampingSchedule::scaled_power(1.0, 0.5, 0.5), InputError);
}

TEST_CASE("check_damping examples") {
  std::vector<double> grid;
  for (int k = 0; k <= 400; ++k) grid.push_back(0.25 * k);

  auto exact = check_damping(DampingSchedule::power(1, 0.5), grid);
  CHECK(exact.h1.holds);
  CHECK(exact.h2.holds);

  // gamma = 1/(1+t) checked against the declaration K=1, alpha=0.5
  auto fast = DampingSchedule::tabulated(grid, [&] {
    std::vector<double> v;
    for (double t : grid) v.push_back(1.0 / (1.0 + t));
    return v;
  }(), 1.0, 0.5);
  auto r = check_damping(fast, grid);
  CHECK_FALSE(r.h1.holds);
  REQUIRE(r.h1.first_violation);
  CHECK(*r.h1.first_violation == 0.25);

  auto doubled = check_damping(DampingSchedule::scaled_power(1, 0.3, 2.0), grid);
  CHECK(doubled.all_hold());

  CHECK_THROWS_AS(check_damping(DampingSchedule::power(1, 0.5), {}), InputError);
}

TEST_CASE("check_damping respects t0") {
  std::vector<double> times{0, 1, 2, 5, 10};
  std::vector<double> values{0.1, 0.1, 1.0, 1.0 / std::sqrt(6.0) * std::sqrt(3.0), 0.5};
  auto late = DampingSchedule::tabulated(times, values, 0.5, 0.5, 2.0);
  std::vector<double> grid{0, 1, 2, 3, 5, 8, 10};
  auto r = check_damping(late, grid);
  CHECK(r.h1.holds);
}

TEST_CASE("Gamma integral matches quadrature") {
  auto s = DampingSchedule::power(1.0, 0.5);
  CHECK(s.integral(0.0, 3.0) == Approx(2.0).epsilon(1e-14));
  auto tab = DampingSchedule::tabulated({0, 1, 4}, {2.0, 1.5, 1.0}, 0.5, 0.5);
  const double q = quad::integrate([&](double t) { return tab(t); }, 0.5, 30.0, 1e-13);
  CHECK(tab.integral(0.5, 30.0) == Approx(q).epsilon(1e-10));
}

TEST_CASE("phi and grad_phi examples") {
  CHECK(phi(scalar(1.0), vec1(2.0)) == 2.0);
  auto cubic = scalar(1.0, ScalarMap::cubic(1.0));
  CHECK(phi(cubic, vec1(1.0)) == 0.75);
  CHECK(grad_phi(cubic, vec1(2.0))[0] == 10.0);
  CHECK(phi(cubic, cubic.minimizer()) == cubic.phi_star());
  CHECK(grad_phi(cubic, cubic.minimizer()).norm() <= 1e-12);
  CHECK_THROWS_AS(phi(cubic, Vector::Zero(2)), InputError);
  CHECK_THROWS_AS(grad_phi(cubic, Vector::Zero(3)), InputError);
}

TEST_CASE("compute_minimizer examples") {
  auto id = ConvexProblem(ProblemSpec{SymmetricOperator::identity(5), Nonlinearity{}, 1.0, "id"});
  CHECK(id.minimizer().norm() == 0.0);
  CHECK(id.phi_star() == 0.0);

  auto cubic = scalar(1.0, ScalarMap::cubic(1.0));
  CHECK(cubic.minimizer()[0] == 0.0);

  // F(s) = (s-2)^4/4: u_bar solves (u-2)^3 + u = 0
  auto shifted = scalar(1.0, ScalarMap::cubic(1.0, 2.0));
  const double root = bisect([](double u) { return (u - 2) * (u - 2) * (u - 2) + u; }, -10.0, 10.0);
  CHECK(shifted.minimizer()[0] == Approx(root).epsilon(1e-12));
  CHECK(std::abs(grad_phi(shifted, shifted.minimizer())[0]) <= 1e-12);
}

TEST_CASE("shifted quadratic minimizer matches a direct solve") {
  auto p = make_quadratic(6, 0.5, 3.0, 17, 2.0);
  const Matrix a = p.op().to_dense();
  const Vector direct = a.ldlt().solve(p.nonlinearity().linear_term());
  CHECK((p.minimizer() - direct).norm() <= 1e-10);
  CHECK(p.h_norm(p.minimizer()) == Approx(2.0).epsilon(1e-10));
}

TEST_CASE("build_wave_problem") {
  auto w2 = build_wave_problem(2, ScalarMap::none());
  Matrix expect(2, 2);
  expect << 18, -9, -9, 18;
  CHECK((w2.op().to_dense() - expect).norm() <= 1e-12);
  CHECK(w2.mass_weight() == Approx(1.0 / 3.0));

  const int n = 12;
  auto w = build_wave_problem(n, ScalarMap::none());
  Eigen::SelfAdjointEigenSolver<Matrix> es(w.op().to_dense());
  const double h = 1.0 / (n + 1);
  for (int k = 1; k <= n; ++k) {
    const double s = std::sin(k * std::numbers::pi * h / 2);
    CHECK(es.eigenvalues()[k - 1] == Approx(4.0 / (h * h) * s * s).epsilon(1e-10));
  }

  auto w64 = build_wave_problem(64, ScalarMap::cubic(1.0));
  CHECK(w64.minimizer().norm() == 0.0);
  CHECK(w64.phi_star() == 0.0);

  CHECK_THROWS_AS(build_wave_problem(1, ScalarMap::none()), InputError);
  CHECK_THROWS_AS(build_wave_problem(4, ScalarMap::linear(-1.0)), InputError);
  CHECK_THROWS_AS(build_wave_problem(4, ScalarMap::cubic(1.0, 1.0)), InputError);
}

TEST_CASE("source_eval examples") {
  const Vector e1 = Vector::Unit(3, 0);
  CHECK(source_eval(SourceTerm::zero(3), 5.0).norm() == 0.0);
  CHECK((source_eval(SourceTerm::power_decay(e1, 1.0, 1.0, 2.0), 1.0) - 0.25 * e1).norm() == 0.0);
  CHECK((source_eval(SourceTerm::exp_decay(e1, 1.0, 3.0, 1.0), 0.0) - 3.0 * e1).norm() == 0.0);

  // the direction is normalised in the H-norm
  auto g = SourceTerm::power_decay(Vector::Ones(4), 0.25, 2.0, 1.5);
  const Vector v = g(0.0);
  CHECK(std::sqrt(0.25 * v.squaredNorm()) == Approx(2.0).epsilon(1e-15));
}

TEST_CASE("classify_source examples") {
  const Vector e1 = Vector::Unit(2, 0);
  auto a05 = DampingSchedule::power(1, 0.5);
  auto c1 = classify_source(a05, SourceTerm::power_decay(e1, 1.0, 1.0, 1.75));
  CHECK(c1.op);
  REQUIRE(c1.nu_max);
  CHECK(*c1.nu_max == 1.5);
  CHECK_FALSE(c1.nu_max_attained);
  CHECK(c1.nu_admissible(1.3));
  CHECK_FALSE(c1.nu_admissible(1.6));

  auto c2 = classify_source(a05, SourceTerm::power_decay(e1, 1.0, 1.0, 1.2));
  CHECK_FALSE(c2.op);
  REQUIRE(c2.nu_max);
  CHECK(*c2.nu_max == Approx(0.4));

  auto c3 = classify_source(DampingSchedule::power(1, 0.3), SourceTerm::zero(2));
  CHECK(c3.op);
  CHECK(c3.square_th2);
  CHECK(c3.square_th3);
  CHECK(*c3.nu_max == 1.3);
}

TEST_CASE("source_weighted_integral examples") {
  const Vector e1 = Vector::Unit(1, 0);
  auto g = SourceTerm::power_decay(e1, 1.0, 1.0, 2.0);
  auto w = source_weighted_integral(g, 0.5, 1, 1e6);
  CHECK(w.value + w.tail_bound == Approx(2.0).epsilon(1e-14));

  CHECK(source_weighted_integral(SourceTerm::zero(1), 0.5, 1, 10.0).value == 0.0);

  auto g2 = SourceTerm::power_decay(e1, 1.0, 2.0, 1.5);
  auto w2 = source_weighted_integral(g2, 1.0, 2, 1e6);
  CHECK(w2.value + w2.tail_bound == Approx(4.0).epsilon(1e-14));

  auto div = source_weighted_integral(SourceTerm::power_decay(e1, 1.0, 1.0, 1.2), 0.5, 1, 1e4);
  CHECK(div.divergent);
  CHECK(std::isfinite(div.value));

  // exp family: int_0^inf (1+t) e^{-t} dt = 2
  auto e = source_weighted_integral(SourceTerm::exp_decay(e1, 1.0, 1.0, 1.0), 1.0, 1, 50.0);
  CHECK(e.value + e.tail_bound == Approx(2.0).epsilon(1e-10));
  CHECK(e.tail_bound < 1e-18);
}

TEST_CASE("semi-coercivity and norm examples") {
  auto id = ConvexProblem(ProblemSpec{SymmetricOperator::identity(3), Nonlinearity{}, 1.0, "id"});
  NormTriple n(id);
  const Vector z = Vector::Zero(3);
  CHECK(n.v_norm(z) == 0.0);
  CHECK(n.vprime_norm(z) == 0.0);
  Vector v(3);
  v << 1.0, -2.0, 0.5;
  CHECK(n.v_norm(v) == Approx(std::sqrt(2.0) * n.h_norm(v)).epsilon(1e-14));
  CHECK(n.vprime_norm(v) == Approx(n.h_norm(v) / std::sqrt(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(n.v_norm(Vector::Zero(2)), InputError);
}

TEST_CASE("interpolation constant examples") {
  auto id = ConvexProblem(ProblemSpec{SymmetricOperator::identity(4), Nonlinearity{}, 1.0, "id"});
  CHECK(interpolation_constant(NormTriple(id), 50, 1) == Approx(1.0).epsilon(1e-12));
  auto zero = make_flat_basin(4, 1.0);
  CHECK(interpolation_constant(NormTriple(zero), 50, 1) == Approx(1.0).epsilon(1e-12));

  auto wave = build_wave_problem(16, ScalarMap::none());
  NormTriple n(wave);
  const double c = interpolation_constant(n, 200, 3);
  CHECK(c <= 1.0 + 1e-12);
  // eigenvectors attain the bound
  CHECK(c >= 1.0 - 1e-12);
}

TEST_CASE("spectral_bound dominates the dense eigenvalue") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SplitMix64 rng(seed);
    Matrix b(8, 8);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) b(i, j) = rng.normal();
    const Matrix a = b * b.transpose();
    const double exact = Eigen::SelfAdjointEigenSolver<Matrix>(a).eigenvalues().maxCoeff();
    CHECK(spectral_bound(SymmetricOperator::dense(a)) >= exact);
  }
  CHECK(spectral_bound(SymmetricOperator::identity(3)) == Approx(1.1));
  CHECK(spectral_bound(build_wave_problem(3, ScalarMap::none()).op()) == 64.0);
}
