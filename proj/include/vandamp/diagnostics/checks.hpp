#pragma once

// Finite-horizon operationalisations of the asymptotic statements: energy
// identity residuals, decay fits, little-o trends, boundedness of weighted
// integrals, Cauchy-type convergence and minimizer membership.

#include "vandamp/core.hpp"
#include "vandamp/diagnostics/energy_record.hpp"
#include "vandamp/problem/convex_problem.hpp"
#include "vandamp/problem/damping.hpp"
#include "vandamp/problem/norms.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vandamp {

// --- energy identity ---------------------------------------------------------

/// max_k | (E_{k+1} - E_{k-1}) / (2 dt_s) - (-gamma(t_k) |u'_k|^2 + <g(t_k), u'_k>) |
/// over interior samples. Expected to scale like dt_s^2.
inline double energy_derivative_residual(const EnergyRecord& record, const DampingSchedule& schedule) {
  const std::size_t n = record.size();
  if (n < 3) throw PreconditionError("energy_derivative_residual: need at least 3 samples");
  const double dts = record.t[1] - record.t[0];
  for (std::size_t k = 2; k < n; ++k) {
    if (std::abs((record.t[k] - record.t[k - 1]) - dts) > 1e-9 * dts)
      throw PreconditionError("energy_derivative_residual: sampling is not uniform");
  }
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double numeric = (record.E[k + 1] - record.E[k - 1]) / (2.0 * dts);
    const double exact = -schedule(record.t[k]) * record.speed[k] * record.speed[k] +
                         record.source_power[k];
    worst = std::max(worst, std::abs(numeric - exact));
  }
  return worst;
}

/// Largest increase series[k+1] - series[k] (0 if the series never increases).
/// NaN entries are skipped.
inline double max_increase(std::span<const double> series) {
  double worst = 0.0;
  for (std::size_t k = 1; k < series.size(); ++k) {
    if (std::isnan(series[k]) || std::isnan(series[k - 1])) continue;
    worst = std::max(worst, series[k] - series[k - 1]);
  }
  return worst;
}

// --- decay fits ----------------------------------------------------------------

enum class FitVerdict { consistent, inconsistent, inconclusive };

inline std::string to_string(FitVerdict v) {
  switch (v) {
    case FitVerdict::consistent: return "consistent";
    case FitVerdict::inconsistent: return "inconsistent";
    case FitVerdict::inconclusive: return "inconclusive";
  }
  return "?";
}

struct DecayFit {
  double t_a = 0.0;
  double t_b = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  double correlation = 0.0;
  std::size_t samples = 0;
  bool degenerate = false;  // every value in the window was zero
  FitVerdict verdict = FitVerdict::inconclusive;
};

namespace detail {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double correlation = 0.0;
};

inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  f.correlation = (sxx > 0.0 && syy > 0.0) ? sxy / std::sqrt(sxx * syy) : 0.0;
  return f;
}

}  // namespace detail

/// Least-squares line through (log t, log q) over the final `window_fraction`
/// of the time span. Verdict for target rate nu: consistent if slope <= -nu + 0.1
/// or t^nu q is monotone decreasing over the window.
inline DecayFit decay_fit(std::span<const double> t, std::span<const double> q,
                          double window_fraction, double nu) {
  if (t.size() != q.size()) throw InputError("decay_fit: series lengths differ");
  if (!(window_fraction > 0.0 && window_fraction <= 1.0))
    throw InputError("decay_fit: window_fraction must lie in (0, 1]");
  if (t.empty()) throw PreconditionError("decay_fit: window too short");
  DecayFit fit;
  fit.t_b = t.back();
  fit.t_a = t.back() - window_fraction * (t.back() - t.front());
  std::vector<double> lx, ly, tw, qw;
  std::size_t in_window = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < fit.t_a || !(t[i] > 0.0)) continue;
    ++in_window;
    if (q[i] > 0.0) {
      lx.push_back(std::log(t[i]));
      ly.push_back(std::log(q[i]));
      tw.push_back(t[i]);
      qw.push_back(q[i]);
    }
  }
  if (in_window < 10 || !(fit.t_a < fit.t_b))
    throw PreconditionError("decay_fit: window too short (need >= 10 samples)");
  fit.samples = lx.size();
  if (lx.empty()) {
    fit.degenerate = true;
    fit.verdict = FitVerdict::consistent;
    return fit;
  }
  if (lx.size() < 10) {
    fit.verdict = FitVerdict::inconclusive;
    return fit;
  }
  const auto line = detail::least_squares(lx, ly);
  fit.slope = line.slope;
  fit.intercept = line.intercept;
  fit.correlation = line.correlation;
  bool scaled_decreasing = true;
  for (std::size_t i = 1; i < tw.size(); ++i) {
    if (std::pow(tw[i], nu) * qw[i] > std::pow(tw[i - 1], nu) * qw[i - 1]) {
      scaled_decreasing = false;
      break;
    }
  }
  fit.verdict = (fit.slope <= -nu + 0.1 || scaled_decreasing) ? FitVerdict::consistent
                                                                : FitVerdict::inconsistent;
  return fit;
}

enum class Quantity { E, p, speed };

inline DecayFit decay_fit(const EnergyRecord& record, Quantity quantity, double window_fraction,
                          double nu) {
  const std::vector<double>& q = quantity == Quantity::E   ? record.E
                                 : quantity == Quantity::p ? record.p
                                                           : record.speed;
  return decay_fit(record.t, q, window_fraction, nu);
}

// --- little-o trend --------------------------------------------------------------

struct TrendResult {
  std::vector<double> series;  // (1+t_k)^nu E_k
  double ratio = 0.0;          // s(T) / max s over [T/100, T/10]
  double slope = 0.0;          // log-log slope of E over [T/100, T]
  bool slope_available = false;
  bool degenerate = false;     // E identically zero on the window
  bool pass = false;
};

/// Little-o check for E(t) = o(t^-nu): pass when the scaled series (1+t)^nu E
/// shrinks to at most 0.2 of its early-window maximum across the final two
/// decades [T/100, T], or when the log-log slope of E there is <= -nu - 0.1.
inline TrendResult scaled_energy_trend(std::span<const double> t, std::span<const double> E, double nu) {
  if (t.size() != E.size()) throw InputError("scaled_energy_trend: series lengths differ");
  TrendResult r;
  r.series.reserve(t.size());
  for (std::size_t k = 0; k < t.size(); ++k)
    r.series.push_back(std::pow(1.0 + t[k], nu) * std::max(E[k], 0.0));
  if (t.empty()) {
    r.degenerate = true;
    r.pass = true;
    return r;
  }
  const double T = t.back();
  const double early_lo = T / 100.0;
  const double early_hi = T / 10.0;
  double early_max = 0.0;
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] >= early_lo && t[k] <= early_hi) early_max = std::max(early_max, r.series[k]);
    if (t[k] >= early_lo && t[k] > 0.0 && E[k] > 0.0) {
      lx.push_back(std::log(t[k]));
      ly.push_back(std::log(E[k]));
    }
  }
  if (early_max == 0.0) {
    r.degenerate = r.series.back() == 0.0;
    r.ratio = r.degenerate ? 0.0 : std::numeric_limits<double>::infinity();
  } else {
    r.ratio = r.series.back() / early_max;
  }
  if (lx.size() >= 10) {
    r.slope = detail::least_squares(lx, ly).slope;
    r.slope_available = true;
  }
  r.pass = r.ratio <= 0.2 || (r.slope_available && r.slope <= -nu - 0.1);
  return r;
}

inline TrendResult scaled_energy_trend(const EnergyRecord& record, double nu) {
  return scaled_energy_trend(record.t, record.E, nu);
}

// --- boundedness of running integrals ---------------------------------------------

struct IntegralVerdict {
  double terminal = 0.0;
  double last_decade_growth = 0.0;
  bool bounded = false;
};

/// A running integral is declared bounded when its growth over the last decade
/// [T/10, T] is at most 5% of its terminal value.
inline IntegralVerdict running_integral_verdict(std::span<const double> t,
                                                std::span<const double> integral) {
  IntegralVerdict v;
  if (t.empty()) {
    v.bounded = true;
    return v;
  }
  v.terminal = integral.back();
  const double T = t.back();
  const auto it = std::lower_bound(t.begin(), t.end(), T / 10.0);
  const auto k = static_cast<std::size_t>(it - t.begin());
  v.last_decade_growth = v.terminal - integral[std::min(k, integral.size() - 1)];
  v.bounded = v.terminal == 0.0 || v.last_decade_growth <= 0.05 * v.terminal;
  return v;
}

/// I_nu(T) = int_0^T (1+s)^(nu - alpha) |u'|^2 ds and its boundedness verdict.
inline IntegralVerdict velocity_integral_verdict(const EnergyRecord& record, double nu) {
  for (std::size_t i = 0; i < record.nu.size(); ++i) {
    if (std::abs(record.nu[i] - nu) <= 1e-12) return running_integral_verdict(record.t, record.I_nu[i]);
  }
  throw InputError("velocity_integral_verdict: nu = " + std::to_string(nu) +
                   " is not in the record's configured list");
}

/// int_0^T (1+s)^alpha ||grad Phi(u(s))||_V' ds and its boundedness verdict.
inline IntegralVerdict gradient_integral_verdict(const EnergyRecord& record) {
  return running_integral_verdict(record.t, record.grad_integral);
}

// --- convergence detectors -----------------------------------------------------------

enum class NormKind { H, V, Vprime };

inline double norm_of(const NormTriple& norms, NormKind kind, const Vector& v) {
  switch (kind) {
    case NormKind::H: return norms.h_norm(v);
    case NormKind::V: return norms.v_norm(v);
    case NormKind::Vprime: return norms.vprime_norm(v);
  }
  return 0.0;
}

struct CauchyResult {
  double sup_distance = 0.0;
  double tolerance = 0.0;
  std::size_t checkpoints = 0;
  bool converged = false;
};

/// sup over checkpoint pairs in [T/2, T] of ||u(t) - u(tau)||; converged when it
/// is at most `tolerance` (default 1e-3 (1 + ||u(T)||)).
inline CauchyResult cauchy_check(const std::vector<Checkpoint>& checkpoints, const NormTriple& norms,
                                 NormKind kind, std::optional<double> tolerance = std::nullopt) {
  if (checkpoints.empty()) throw PreconditionError("cauchy_check: no checkpoints");
  const double T = checkpoints.back().t;
  std::vector<const Checkpoint*> window;
  for (const auto& c : checkpoints)
    if (c.t >= 0.5 * T) window.push_back(&c);
  if (window.size() < 4)
    throw PreconditionError("cauchy_check: need at least 4 checkpoints in [T/2, T]");
  CauchyResult r;
  r.checkpoints = window.size();
  for (std::size_t i = 0; i < window.size(); ++i)
    for (std::size_t j = i + 1; j < window.size(); ++j)
      r.sup_distance = std::max(r.sup_distance, norm_of(norms, kind, window[i]->u - window[j]->u));
  r.tolerance = tolerance.value_or(1e-3 * (1.0 + norm_of(norms, kind, checkpoints.back().u)));
  r.converged = r.sup_distance <= r.tolerance;
  return r;
}

struct LimitCandidate {
  double gap = 0.0;           // Phi(u) - Phi*
  double gradnorm_Vp = 0.0;   // ||grad Phi(u)||_V'
  bool member = false;        // both <= 1e-6 (1 + |Phi*|)
};

inline LimitCandidate limit_candidate_check(const ConvexProblem& problem, const NormTriple& norms,
                                            const Vector& u_final) {
  LimitCandidate c;
  c.gap = phi(problem, u_final) - problem.phi_star();
  c.gradnorm_Vp = norms.vprime_norm(grad_phi(problem, u_final));
  const double tol = 1e-6 * (1.0 + std::abs(problem.phi_star()));
  c.member = c.gap <= tol && c.gradnorm_Vp <= tol;
  return c;
}

struct AnchorLimit {
  double oscillation = 0.0;  // max - min of p over [T/2, T]
  double tolerance = 0.0;
  bool limit_exists = false;
};

/// Detects convergence of p(t) = 1/2 |u - u_bar|^2: oscillation over [T/2, T]
/// at most 0.05 (1 + p(T)). The record must span two decades.
inline AnchorLimit anchor_limit_check(const EnergyRecord& record) {
  if (record.size() < 2) throw PreconditionError("anchor_limit_check: horizon too short");
  const double T = record.t.back();
  const auto first_positive = std::find_if(record.t.begin(), record.t.end(),
                                           [](double s) { return s > 0.0; });
  if (first_positive == record.t.end() || T < 100.0 * *first_positive)
    throw PreconditionError("anchor_limit_check: record must span at least two decades");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t k = 0; k < record.size(); ++k) {
    if (record.t[k] < 0.5 * T) continue;
    lo = std::min(lo, record.p[k]);
    hi = std::max(hi, record.p[k]);
  }
  AnchorLimit a;
  a.oscillation = hi - lo;
  a.tolerance = 0.05 * (1.0 + record.p.back());
  a.limit_exists = a.oscillation <= a.tolerance;
  return a;
}

}  // namespace vandamp
