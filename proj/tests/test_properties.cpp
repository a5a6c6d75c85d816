// Property tests: hand-rolled generators over problem families, sources,
// schedules and trajectories, each checked against an invariant.

#include <catch_amalgamated.hpp>

#include "vandamp/vandamp.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

using namespace vandamp;

namespace {

// --- generators -------------------------------------------------------------------------

// Draws are bound to named locals so their order does not depend on argument evaluation order.
ConvexProblem random_problem(SplitMix64& rng) {
  const auto pick = rng.next() % 5;
  const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.next() % 6);
  const auto seed = rng.next();
  const double x1 = rng.uniform(), x2 = rng.uniform(), x3 = rng.uniform(), x4 = rng.uniform();
  switch (pick) {
    case 0: return make_quadratic(n, 0.5 + 1.5 * x1, 2.0 + 4.0 * x2, seed, -2.0 + 4.0 * x3);
    case 1: return make_quadratic(n, 0.0, 1.0 + 3.0 * x1, seed);
    case 2: return make_shifted_quartic(n, x1, 1.0 + 2.0 * x2, seed, -1.0 + 2.0 * x3, 0.1 + 1.9 * x4);
    case 3: return make_flat_basin(n, 0.2 + 1.8 * x1, 0.5 + 1.5 * x2);
    default: {
      const ScalarMap maps[] = {ScalarMap::none(), ScalarMap::linear(0.1 + 1.9 * x1),
                                ScalarMap::cubic(0.1 + 1.9 * x1)};
      return build_wave_problem(2 + static_cast<Eigen::Index>(seed % 15), maps[rng.next() % 3]);
    }
  }
}

Vector random_point(SplitMix64& rng, Eigen::Index n, double scale) {
  const double r = scale * rng.uniform(0.1, 1.0);
  return r * rng.normal_vector(n);
}

SourceTerm random_source(SplitMix64& rng, Eigen::Index n, double h) {
  const Vector dir = random_unit_vector(rng, n, h);
  const auto pick = rng.next() % 4;
  const double c = rng.uniform(0.1, 1.0);
  const double beta = rng.uniform(1.6, 3.0);
  const double rate = rng.uniform(0.2, 2.0);
  const double omega = rng.uniform(0.5, 3.0);
  switch (pick) {
    case 0: return SourceTerm::zero(n);
    case 1: return SourceTerm::power_decay(dir, h, c, beta);
    case 2: return SourceTerm::exp_decay(dir, h, c, rate);
    default: return SourceTerm::modulated_power(dir, h, c, beta, omega);
  }
}

DampingSchedule random_power_schedule(SplitMix64& rng) {
  const double K = rng.uniform(0.3, 3.0);
  const double a = rng.uniform(0.0, 0.95);
  const double t0 = rng.uniform() < 0.5 ? 0.0 : rng.uniform(0.0, 5.0);
  const double scale = rng.uniform(1.0, 3.0);
  if (rng.uniform() < 0.5) return DampingSchedule::power(K, a, t0);
  return DampingSchedule::scaled_power(K, a, scale, t0);
}

// Composite Simpson on [a, b] with n (even) panels.
double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("gradient matches central differences") {
  SplitMix64 rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    const ConvexProblem p = random_problem(rng);
    const Vector u = random_point(rng, p.dimension(), 3.0);
    const Vector d = random_unit_vector(rng, p.dimension(), p.mass_weight());
    const double eps = 1e-5;
    const double fd = (phi(p, u + eps * d) - phi(p, u - eps * d)) / (2 * eps);
    const double exact = p.inner(grad_phi(p, u), d);
    INFO(p.family() << " n=" << p.dimension());
    CHECK(std::abs(fd - exact) <= 1e-5 * (1.0 + std::abs(exact) + std::abs(phi(p, u))));
  }
}

TEST_CASE("gradient is monotone and Phi is convex") {
  SplitMix64 rng(202);
  for (int trial = 0; trial < 100; ++trial) {
    const ConvexProblem p = random_problem(rng);
    const Eigen::Index n = p.dimension();
    const Vector x = random_point(rng, n, 3.0);
    const Vector y = random_point(rng, n, 3.0);
    INFO(p.family() << " n=" << n);
    CHECK(p.inner(grad_phi(p, x) - grad_phi(p, y), x - y) >= -1e-10);
    // supporting hyperplane at x, evaluated at the minimizer
    const Vector& ubar = p.minimizer();
    CHECK(phi(p, ubar) - phi(p, x) - p.inner(grad_phi(p, x), ubar - x) >= -1e-10 * (1 + std::abs(phi(p, x))));
    CHECK(phi(p, x) >= p.phi_star() - 1e-12);
    // midpoint convexity of F
    const double mid = p.F(0.5 * (x + y));
    CHECK(mid <= 0.5 * (p.F(x) + p.F(y)) + 1e-10 * (1 + std::abs(mid)));
  }
}

TEST_CASE("norm chain and duality") {
  SplitMix64 rng(303);
  for (int trial = 0; trial < 100; ++trial) {
    const ConvexProblem p = random_problem(rng);
    const NormTriple norms(p);
    const Eigen::Index n = p.dimension();
    const Vector v = random_point(rng, n, 5.0);
    const Vector w = random_point(rng, n, 5.0);
    const double hv = norms.h_norm(v);
    CHECK(norms.vprime_norm(v) <= hv * (1 + 1e-10));
    CHECK(hv <= norms.v_norm(v) * (1 + 1e-12));
    CHECK(std::abs(p.inner(v, w)) <= norms.vprime_norm(v) * norms.v_norm(w) * (1 + 1e-9));
    // interpolation with theta = 1/2: |v|^2 <= ||v||_V' ||v||_V
    CHECK(hv * hv <= norms.vprime_norm(v) * norms.v_norm(v) * (1 + 1e-9));
  }
}

TEST_CASE("classification agrees with decade growth of the weighted integrals") {
  // Oracle: the integral over one decade relative to the previous one. A
  // convergent integrand with envelope exponent e < -1 gives the ratio
  // 10^(e+1) <= 10^-0.1; a divergent one gives a ratio of at least 1. Power
  // sources are integrated in s = log(1+t), modulated ones in t at 16 nodes per period.
  auto log_simpson = [](const std::function<double(double)>& f, double a, double b) {
    return simpson([&](double s) { return f(std::expm1(s)) * std::exp(s); }, std::log1p(a),
                   std::log1p(b), 2000);
  };
  int checked = 0;
  for (double a : {0.0, 0.25, 0.5, 0.75})
    for (double beta : {0.8, 1.2, 1.45, 1.75, 2.0, 3.0})
      for (int family = 0; family < 2; ++family) {
        const Vector dir = Vector::Ones(1);
        const SourceTerm g = family == 0 ? SourceTerm::power_decay(dir, 1.0, 0.7, beta)
                                         : SourceTerm::modulated_power(dir, 1.0, 0.7, beta, 1.0);
        const auto cls = classify_source(DampingSchedule::power(1.0, a), g);
        const std::pair<double, int> conditions[] = {{a, 1}, {3 * a, 2}, {2 * a + 1, 2}};
        const bool claims[] = {cls.op, cls.square_th2, cls.square_th3};
        for (int k = 0; k < 3; ++k) {
          const auto [r, p] = conditions[k];
          const double e = r - p * beta;
          if (std::abs(e + 1.0) < 0.1) continue;
          auto f = [&](double t) { return std::pow(1.0 + t, r) * std::pow(g.norm(t), p); };
          double early = 0.0, late = 0.0;
          if (family == 0) {
            early = log_simpson(f, 1e5, 1e6);
            late = log_simpson(f, 1e6, 1e7);
          } else {
            early = simpson(f, 1e3, 1e4, 24000);
            late = simpson(f, 1e4, 1e5, 240000);
          }
          const bool finite = late / early < 0.85;
          INFO("alpha=" << a << " beta=" << beta << " family=" << family << " r=" << r << " p=" << p);
          CHECK(claims[k] == finite);
          CHECK(weighted_integral_finite(g, r, p) == finite);
          if (family == 0) {
            // closed form at T = 1e6 against the quadrature, and its tail bound
            const auto w = source_weighted_integral(g, r, p, 1e6);
            CHECK(w.divergent == !finite);
            const double head = log_simpson(f, 0.0, 1e2) + log_simpson(f, 1e2, 1e4) + log_simpson(f, 1e4, 1e6);
            CHECK(w.value == Catch::Approx(head).epsilon(1e-8));
            if (finite) CHECK(w.tail_bound == Catch::Approx(late / (1.0 - late / early)).epsilon(1e-3));
          } else {
            CHECK(source_weighted_integral(g, r, p, 1e3).divergent == !finite);
          }
          ++checked;
        }
      }
  CHECK(checked > 100);
}

TEST_CASE("exp-decay weighted integrals match quadrature") {
  SplitMix64 rng(404);
  for (int trial = 0; trial < 20; ++trial) {
    const double rate = rng.uniform(0.2, 2.0);
    const double r = rng.uniform(0.0, 3.0);
    const int p = 1 + static_cast<int>(rng.next() % 2);
    const SourceTerm g = SourceTerm::exp_decay(Vector::Ones(1), 1.0, 0.5, rate);
    const auto w = source_weighted_integral(g, r, p, 1e6);
    auto f = [&](double t) { return std::pow(1.0 + t, r) * std::pow(g.norm(t), p); };
    const double ref = simpson(f, 0.0, 400.0 / rate, 400000);
    CHECK_FALSE(w.divergent);
    CHECK(w.value == Catch::Approx(ref).epsilon(1e-8));
  }
}

TEST_CASE("power schedules satisfy h1 and h2 on random grids") {
  SplitMix64 rng(505);
  for (int trial = 0; trial < 100; ++trial) {
    const DampingSchedule s = random_power_schedule(rng);
    std::vector<double> grid;
    double t = 0.0;
    for (int k = 0; k < 200; ++k) grid.push_back(t += rng.uniform(0.0, 50.0));
    const auto report = check_damping(s, grid);
    CHECK(report.all_hold());
    // Gamma(t, tau) is additive and nonnegative
    const double a = rng.uniform(0.0, 100.0);
    const double b = a + rng.uniform(0.0, 100.0);
    const double c = b + rng.uniform(0.0, 100.0);
    CHECK(big_gamma(s, a, c) == Catch::Approx(big_gamma(s, a, b) + big_gamma(s, b, c)).epsilon(1e-12));
    CHECK(big_gamma(s, a, b) >= 0.0);
  }
}

TEST_CASE("lemma bound holds for random K, alpha and tau >= tau0") {
  SplitMix64 rng(606);
  for (int trial = 0; trial < 40; ++trial) {
    const double K = rng.uniform(0.3, 3.0);
    const double alpha = rng.uniform(0.0, 0.9);
    const auto s = DampingSchedule::power(K, alpha);
    const double tau = tau0(s) + std::pow(10.0, rng.uniform(-1.0, 3.0));
    const auto r = lemma1_check(s, tau);
    INFO("K=" << s.K() << " alpha=" << s.alpha() << " tau=" << tau);
    CHECK(r.pass);
    CHECK(r.lhs > 0.0);
  }
}

TEST_CASE("trajectory invariants on random scenarios") {
  SplitMix64 rng(707);
  for (int trial = 0; trial < 30; ++trial) {
    const ConvexProblem p = random_problem(rng);
    const Eigen::Index n = p.dimension();
    const DampingSchedule d = random_power_schedule(rng);
    const SourceTerm g = random_source(rng, n, p.mass_weight());
    const System sys(p, d, g);
    const Vector offset = random_point(rng, n, 1.0);
    const Vector velocity = random_point(rng, n, 1.0);
    TrajectoryState init{0.0, p.minimizer() + offset, velocity};
    const double dt = std::min(0.01, stable_step_limit(p, init, 0.5));
    const double steps = std::ceil(50.0 / dt / 10.0) * 10.0;
    const IntegratorConfig cfg{50.0 / steps, 50.0, 10, 0.5};
    const EnergyRecord rec = integrate(cfg, sys, init, RecordOptions{{0.0, 2.0 * d.alpha()}, 8});
    INFO(p.family() << " n=" << n << " source=" << to_string(g.family()));
    for (double e : rec.E) CHECK(e >= -1e-12);
    for (const auto& series : rec.I_nu)
      for (std::size_t k = 1; k < series.size(); ++k) CHECK(series[k] >= series[k - 1]);
    for (std::size_t k = 1; k < rec.size(); ++k) CHECK(rec.grad_integral[k] >= rec.grad_integral[k - 1]);
    if (g.is_zero()) CHECK(max_increase(rec.E) <= 1e-10);
    if (rec.etilde_available) CHECK(max_increase(rec.Etilde) <= 1e-10);
    // |u - u_bar| <= |u| + |u_bar| bounds the recorded sup of |u| from below
    const double anchor = p.h_norm(p.minimizer());
    for (std::size_t k = 0; k < rec.size(); ++k)
      CHECK(rec.max_u_norm >= std::sqrt(2.0 * rec.p[k]) - anchor - 1e-12);
  }
}
