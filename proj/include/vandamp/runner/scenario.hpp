#pragma once

// One scenario end to end: config -> problem/schedule/source/initial data ->
// trajectory diagnostics -> per-theorem verdicts.
//
// Verdicts. Each of theorem1..theorem4 and prop1 (one per configured nu) is
// evaluated on every run. A verdict whose hypotheses hold is "pass" or "fail";
// otherwise it is "probe" and only reported. A scenario whose source violates
// int (1+t)^alpha |g| < inf is a probe scenario: all its verdicts are probes.
// Boundedness of u, assumed by theorem1/theorem4/prop1, is taken as given when
// Phi is coercive; otherwise it must come from the square-integrability
// conditions on g.

#include "vandamp/diagnostics/checks.hpp"
#include "vandamp/diagnostics/energy.hpp"
#include "vandamp/dynamics/integrate.hpp"
#include "vandamp/problem/convex_problem.hpp"
#include "vandamp/problem/damping.hpp"
#include "vandamp/problem/norms.hpp"
#include "vandamp/problem/source.hpp"
#include "vandamp/random.hpp"
#include "vandamp/runner/config.hpp"
#include "vandamp/runner/csv.hpp"
#include "vandamp/runner/format.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <initializer_list>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace vandamp {

// --- construction -------------------------------------------------------------------

inline ConvexProblem build_problem(const ProblemConfig& p) {
  const Eigen::Index n = p.dimension;
  if (p.family == "quadratic") return make_quadratic(n, p.lambda_min, p.lambda_max, p.seed, p.shift);
  if (p.family == "shifted_quartic")
    return make_shifted_quartic(n, p.lambda_min, p.lambda_max, p.seed, p.shift, p.coefficient);
  if (p.family == "flat_basin") return make_flat_basin(n, p.width, p.coefficient);
  if (p.family == "wave") {
    ScalarMap f = p.nonlinearity == "cubic"    ? ScalarMap::cubic(p.coefficient)
                  : p.nonlinearity == "linear" ? ScalarMap::linear(p.coefficient)
                                               : ScalarMap::none();
    return build_wave_problem(n, f);
  }
  throw InputError("unknown problem family '" + p.family + "'");
}

inline DampingSchedule build_schedule(const DampingConfig& d) {
  if (d.kind == "power") return DampingSchedule::power(d.K, d.alpha, d.t0);
  if (d.kind == "scaled_power") return DampingSchedule::scaled_power(d.K, d.alpha, d.scale, d.t0);
  return DampingSchedule::tabulated(d.times, d.values, d.K, d.alpha, d.t0);
}

inline SourceTerm build_source(const SourceConfig& s, Eigen::Index n, double mass_weight) {
  if (s.family == "zero" || s.amplitude == 0.0) return SourceTerm::zero(n);
  SplitMix64 rng(s.seed);
  const Vector dir = random_unit_vector(rng, n, mass_weight);
  if (s.family == "power_decay") return SourceTerm::power_decay(dir, mass_weight, s.amplitude, s.beta);
  if (s.family == "exp_decay") return SourceTerm::exp_decay(dir, mass_weight, s.amplitude, s.rate);
  return SourceTerm::modulated_power(dir, mass_weight, s.amplitude, s.beta, s.frequency);
}

/// u(0) = u_bar + offset * (seeded H-unit direction, or the bump 16 x^2 (1-x)^2),
/// u'(0) = velocity * (an independent seeded H-unit direction).
inline TrajectoryState build_initial(const InitialConfig& in, const ConvexProblem& problem) {
  const Eigen::Index n = problem.dimension();
  const double h = problem.mass_weight();
  TrajectoryState s{0.0, problem.minimizer(), Vector::Zero(n)};
  if (in.profile == "bump") {
    const Vector x = wave_nodes(n);
    s.u += in.offset * (16.0 * x.array().square() * (1.0 - x.array()).square()).matrix();
  } else if (in.offset != 0.0) {
    SplitMix64 rng(in.seed);
    s.u += in.offset * random_unit_vector(rng, n, h);
  }
  if (in.velocity != 0.0) {
    SplitMix64 rng(in.seed ^ 0x9e3779b97f4a7c15ULL);
    s.v = in.velocity * random_unit_vector(rng, n, h);
  }
  return s;
}

/// Explicit dt is checked against the stability guard; otherwise
/// dt = min(1e-2, guard limit), shrunk so that t_end is a whole number of samples.
inline IntegratorConfig resolve_integrator(const IntegratorSection& it, const ConvexProblem& problem,
                                           const TrajectoryState& initial) {
  IntegratorConfig c;
  c.t_end = it.t_end;
  c.sample_stride = it.sample_stride;
  c.stability_margin = it.stability_margin;
  if (it.dt) {
    c.dt = *it.dt;
    check_stability(c, problem, initial);
    return c;
  }
  const double raw = std::min(1e-2, stable_step_limit(problem, initial, it.stability_margin));
  const double samples = std::ceil(it.t_end / (raw * it.sample_stride) - 1e-9);
  c.dt = samples > 0 ? it.t_end / (samples * it.sample_stride) : raw;
  return c;
}

/// Grid for the damping hypotheses: 4097 uniform points on [0, t_end] plus 16
/// subdivisions of every table interval.
inline std::vector<double> damping_grid(const DampingSchedule& schedule, double t_end) {
  std::vector<double> grid;
  for (int k = 0; k <= 4096; ++k) grid.push_back(t_end * k / 4096.0);
  const auto& nodes = schedule.table_times();
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
    for (int j = 0; j < 16; ++j) grid.push_back(nodes[i] + (nodes[i + 1] - nodes[i]) * j / 16.0);
  if (!nodes.empty()) grid.push_back(nodes.back());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

/// Phi coercive on the instance, so every trajectory with finite energy stays bounded.
inline bool coercive(const ProblemConfig& p) {
  if (p.family == "wave" || p.family == "flat_basin") return true;
  if (p.family == "shifted_quartic") return p.lambda_min > 0.0 || p.coefficient > 0.0;
  return p.lambda_min > 0.0;
}

struct Scenario {
  ScenarioConfig config;
  ConvexProblem problem;
  DampingSchedule schedule;
  SourceTerm source;
  TrajectoryState initial;
  IntegratorConfig integrator;
  SourceClassification classification;
  DampingReport damping;
  std::vector<double> nu;  // recorded rates: 2 alpha, then the configured ones
  bool bounded_by_coercivity = false;
  bool probe = false;      // int (1+t)^alpha |g| diverges
};

inline Scenario build_scenario(const ScenarioConfig& cfg) {
  try {
    ConvexProblem problem = build_problem(cfg.problem);
    DampingSchedule schedule = build_schedule(cfg.damping);
    SourceTerm source = build_source(cfg.source, problem.dimension(), problem.mass_weight());
    TrajectoryState initial = build_initial(cfg.initial, problem);
    IntegratorConfig integrator = resolve_integrator(cfg.integrator, problem, initial);
    SourceClassification cls = classify_source(schedule, source);
    std::vector<double> nu{2.0 * cfg.damping.alpha};
    for (double v : cfg.diagnostics.nu)
      if (std::find(nu.begin(), nu.end(), v) == nu.end()) nu.push_back(v);
    DampingReport damping = check_damping(schedule, damping_grid(schedule, integrator.t_end));
    const bool probe = !cls.op;
    return Scenario{cfg, std::move(problem), std::move(schedule), std::move(source),
                    std::move(initial), integrator, cls, damping, std::move(nu),
                    coercive(cfg.problem), probe};
  } catch (const ConfigError&) {
    throw;
  } catch (const InputError& e) {
    throw ConfigError({e.what()});
  } catch (const ConvergenceError& e) {
    throw ConfigError({e.what()});
  }
}

// --- canonical text and digest ------------------------------------------------------------

inline std::string to_text(const ScenarioConfig& c) {
  std::string out;
  auto line = [&](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
  auto list = [](const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + format_real(xs[i]);
    return s;
  };
  out += "[problem]\n";
  line("family", c.problem.family);
  line("dimension", std::to_string(c.problem.dimension));
  line("lambda_min", format_real(c.problem.lambda_min));
  line("lambda_max", format_real(c.problem.lambda_max));
  line("seed", std::to_string(c.problem.seed));
  line("shift", format_real(c.problem.shift));
  line("coefficient", format_real(c.problem.coefficient));
  line("nonlinearity", c.problem.nonlinearity);
  line("width", format_real(c.problem.width));
  out += "\n[damping]\n";
  line("kind", c.damping.kind);
  line("K", format_real(c.damping.K));
  line("alpha", format_real(c.damping.alpha));
  line("t0", format_real(c.damping.t0));
  if (c.damping.kind == "scaled_power") line("scale", format_real(c.damping.scale));
  if (c.damping.kind == "tabulated") {
    line("times", list(c.damping.times));
    line("values", list(c.damping.values));
  }
  out += "\n[source]\n";
  line("family", c.source.family);
  line("amplitude", format_real(c.source.amplitude));
  line("beta", format_real(c.source.beta));
  line("rate", format_real(c.source.rate));
  line("frequency", format_real(c.source.frequency));
  line("seed", std::to_string(c.source.seed));
  out += "\n[initial]\n";
  line("profile", c.initial.profile);
  line("seed", std::to_string(c.initial.seed));
  line("offset", format_real(c.initial.offset));
  line("velocity", format_real(c.initial.velocity));
  out += "\n[integrator]\n";
  if (c.integrator.dt) line("dt", format_real(*c.integrator.dt));
  line("t_end", format_real(c.integrator.t_end));
  line("sample_stride", std::to_string(c.integrator.sample_stride));
  line("stability_margin", format_real(c.integrator.stability_margin));
  out += "\n[diagnostics]\n";
  line("nu", list(c.diagnostics.nu));
  line("window_fraction", format_real(c.diagnostics.window_fraction));
  line("checkpoints", std::to_string(c.diagnostics.checkpoints));
  out += "\n[output]\n";
  line("name", c.output.name);
  if (!c.output.csv.empty()) line("csv", c.output.csv);
  return out;
}

inline std::string config_digest(const ScenarioConfig& c) { return hex64(fnv1a(to_text(c))); }

// --- verdicts ---------------------------------------------------------------------------------

enum class Status { pass, fail, probe };

inline std::string to_string(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::probe: return "probe";
  }
  return "?";
}

struct Verdict {
  std::string name;         // theorem1 .. theorem4, prop1
  std::optional<double> nu;  // prop1 only
  bool applicable = false;
  bool observed = false;    // the finite-horizon conclusion holds
  Status status = Status::probe;
  std::vector<std::string> unmet;  // hypotheses that fail
  nlohmann::ordered_json details = nlohmann::ordered_json::object();
};

struct Dissipation {
  std::string quantity = "none";  // E (g = 0), Etilde (tail converges) or none
  double max_increase = 0.0;
  int violations = 0;             // increments above 1e-10
  double min_energy = 0.0;
  bool ok = true;
};

struct ScenarioResult {
  std::string name;
  std::string digest;
  SourceClassification classification;
  bool probe = false;
  bool unstable = false;
  std::string error;
  std::vector<Verdict> verdicts;
  Dissipation dissipation;
  EnergyRecord record;
  IntegratorConfig integrator;
  double wall_seconds = 0.0;

  const Verdict* find(const std::string& name, std::optional<double> nu = std::nullopt) const {
    for (const auto& v : verdicts)
      if (v.name == name && (!nu || (v.nu && std::abs(*v.nu - *nu) < 1e-12))) return &v;
    return nullptr;
  }

  std::string status() const {
    if (unstable) return "unstable";
    bool failed = !dissipation.ok && !probe;
    for (const auto& v : verdicts) failed = failed || v.status == Status::fail;
    if (failed) return "fail";
    return probe ? "probe" : "pass";
  }

  /// 0 pass or probe, 1 verdict failure, 2 instability.
  int exit_code() const {
    const std::string s = status();
    return s == "unstable" ? 2 : s == "fail" ? 1 : 0;
  }
};

namespace detail {

inline nlohmann::ordered_json number(double x) {
  if (std::isnan(x)) return nullptr;
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

template <class F>
void guarded(nlohmann::ordered_json& details, bool& ok, const char* key, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    details[key] = {{"error", e.what()}};
    ok = false;
  }
}

inline nlohmann::ordered_json trend_json(const TrendResult& t) {
  return {{"ratio", number(t.ratio)},
          {"slope", t.slope_available ? number(t.slope) : nullptr},
          {"degenerate", t.degenerate},
          {"pass", t.pass}};
}

inline nlohmann::ordered_json integral_json(const IntegralVerdict& v) {
  return {{"terminal", number(v.terminal)},
          {"last_decade_growth", number(v.last_decade_growth)},
          {"bounded", v.bounded}};
}

inline nlohmann::ordered_json cauchy_json(const CauchyResult& c) {
  return {{"sup_distance", number(c.sup_distance)},
          {"tolerance", number(c.tolerance)},
          {"checkpoints", c.checkpoints},
          {"converged", c.converged}};
}

inline nlohmann::ordered_json limit_json(const LimitCandidate& c) {
  return {{"gap", number(c.gap)}, {"gradnorm_Vp", number(c.gradnorm_Vp)}, {"member", c.member}};
}

}  // namespace detail

/// Hypothesis set of one verdict and the hypotheses that fail on a scenario.
struct Hypotheses {
  std::string name;
  std::optional<double> nu;
  std::vector<std::string> unmet;
};

/// One entry per verdict, in report order: theorem1..theorem4, then prop1 per configured nu.
inline std::vector<Hypotheses> hypothesis_report(const Scenario& s) {
  const auto& cls = s.classification;
  const double alpha = s.schedule.alpha();
  const bool bounded = s.bounded_by_coercivity || cls.square_th2;
  const std::string op = "int (1+t)^alpha |g| < inf";
  std::vector<Hypotheses> out;
  auto add = [&](std::string name, std::optional<double> nu,
                 std::initializer_list<std::pair<bool, std::string>> checks) {
    Hypotheses h{std::move(name), nu, {}};
    if (!s.damping.h1.holds)
      h.unmet.push_back("(h1) gamma(t) >= K/(1+t)^alpha, violated at t = " +
                        format_real(*s.damping.h1.first_violation));
    if (!s.damping.h2.holds)
      h.unmet.push_back("(h2) (1+t)^alpha gamma(t) nonincreasing, violated at t = " +
                        format_real(*s.damping.h2.first_violation));
    for (const auto& [holds, what] : checks)
      if (!holds) h.unmet.push_back(what);
    out.push_back(std::move(h));
  };
  add("theorem1", std::nullopt,
      {{cls.op, op}, {bounded, "u bounded (Phi coercive or int (1+t)^(3 alpha) |g|^2 < inf)"}});
  add("theorem2", std::nullopt, {{cls.op, op}, {cls.square_th2, "int (1+t)^(3 alpha) |g|^2 < inf"}});
  add("theorem3", std::nullopt,
      {{s.problem.is_even(), "Phi even"}, {cls.op, op},
       {cls.square_th3, "int (1+t)^(2 alpha + 1) |g|^2 < inf"}});
  add("theorem4", std::nullopt,
      {{s.problem.has_interior_minimizers(), "arg min Phi has nonempty interior"}, {cls.op, op},
       {bounded, "u bounded"}});
  for (double nu : s.config.diagnostics.nu)
    add("prop1", nu,
        {{cls.nu_admissible(nu), "int (1+t)^(nu/2) |g| < inf"},
         {bounded || weighted_integral_finite(s.source, nu + alpha, 2),
          "u bounded or int (1+t)^(nu + alpha) |g|^2 < inf"}});
  return out;
}

/// Evaluates every verdict on a finished record.
inline std::vector<Verdict> evaluate_verdicts(const Scenario& s, const EnergyRecord& record,
                                              const NormTriple& norms) {
  using detail::guarded;
  const Vector u_final = record.checkpoints.empty() ? s.initial.u : record.checkpoints.back().u;
  std::vector<Verdict> out;

  // conclusions shared by theorem1, theorem2 and prop1: rate nu, velocity integral, limit point
  auto rate_block = [&](Verdict& v, double nu, bool with_limit) {
    bool ok = true;
    guarded(v.details, ok, "trend", [&] {
      auto t = scaled_energy_trend(record, nu);
      v.details["trend"] = detail::trend_json(t);
      ok = ok && t.pass;
    });
    guarded(v.details, ok, "velocity_integral", [&] {
      auto i = velocity_integral_verdict(record, nu);
      v.details["velocity_integral"] = detail::integral_json(i);
      ok = ok && i.bounded;
    });
    guarded(v.details, ok, "energy_fit", [&] {
      auto f = decay_fit(record, Quantity::E, s.config.diagnostics.window_fraction, nu);
      v.details["energy_fit"] = {{"t_a", f.t_a}, {"t_b", f.t_b}, {"slope", detail::number(f.slope)},
                                 {"correlation", detail::number(f.correlation)},
                                 {"verdict", to_string(f.verdict)}};
    });
    if (with_limit) {
      auto c = limit_candidate_check(s.problem, norms, u_final);
      v.details["limit_candidate"] = detail::limit_json(c);
      ok = ok && c.member;
    }
    return ok;
  };

  auto strong_block = [&](Verdict& v) {
    bool ok = true;
    guarded(v.details, ok, "cauchy_V", [&] {
      auto c = cauchy_check(record.checkpoints, norms, NormKind::V);
      v.details["cauchy_V"] = detail::cauchy_json(c);
      ok = ok && c.converged;
    });
    return ok;
  };

  for (auto& h : hypothesis_report(s)) {
    Verdict v;
    v.name = h.name;
    v.nu = h.nu;
    v.unmet = std::move(h.unmet);
    bool ok = true;
    if (v.name == "theorem1") {
      ok = rate_block(v, 2.0 * s.schedule.alpha(), true);
    } else if (v.name == "theorem2") {
      ok = rate_block(v, 2.0 * s.schedule.alpha(), true);
      v.details["sup_u_H"] = detail::number(record.max_u_norm);
      ok = ok && std::isfinite(record.max_u_norm);
      guarded(v.details, ok, "anchor_limit", [&] {
        auto a = anchor_limit_check(record);
        v.details["anchor_limit"] = {{"oscillation", detail::number(a.oscillation)},
                                     {"tolerance", detail::number(a.tolerance)},
                                     {"limit_exists", a.limit_exists}};
        ok = ok && a.limit_exists;
      });
    } else if (v.name == "theorem3") {
      ok = strong_block(v);
      auto c = limit_candidate_check(s.problem, norms, u_final);
      v.details["limit_candidate"] = detail::limit_json(c);
      ok = ok && c.member;
    } else if (v.name == "theorem4") {
      ok = strong_block(v);
      auto gi = gradient_integral_verdict(record);
      v.details["gradient_integral"] = detail::integral_json(gi);
      auto c = limit_candidate_check(s.problem, norms, u_final);
      v.details["limit_candidate"] = detail::limit_json(c);
      ok = ok && gi.bounded && c.member;
    } else {
      ok = rate_block(v, *v.nu, false);
    }
    v.observed = ok;
    v.applicable = v.unmet.empty();
    v.status = (!v.applicable || s.probe) ? Status::probe : ok ? Status::pass : Status::fail;
    out.push_back(std::move(v));
  }
  return out;
}

inline Dissipation dissipation_check(const Scenario& s, const EnergyRecord& record) {
  Dissipation d;
  const std::vector<double>* series = nullptr;
  if (s.source.is_zero()) {
    d.quantity = "E";
    series = &record.E;
  } else if (record.etilde_available) {
    d.quantity = "Etilde";
    series = &record.Etilde;
  }
  if (series) {
    d.max_increase = max_increase(*series);
    for (std::size_t k = 1; k < series->size(); ++k)
      if ((*series)[k] - (*series)[k - 1] > 1e-10) ++d.violations;
  }
  d.min_energy = record.E.empty() ? 0.0 : *std::min_element(record.E.begin(), record.E.end());
  d.ok = d.violations == 0 && d.min_energy >= -1e-12;
  return d;
}

/// Integrates the scenario and evaluates it. Never throws on instability: the
/// result is marked unstable and carries the partial record.
inline ScenarioResult run_scenario(const Scenario& s) {
  const auto start = std::chrono::steady_clock::now();
  ScenarioResult r;
  r.name = s.config.output.name;
  r.digest = config_digest(s.config);
  r.classification = s.classification;
  r.probe = s.probe;
  r.integrator = s.integrator;
  const System sys(s.problem, s.schedule, s.source);
  RecordOptions opts{s.nu, s.config.diagnostics.checkpoints};
  try {
    r.record = integrate(s.integrator, sys, s.initial, opts);
  } catch (const StabilityError& e) {
    r.unstable = true;
    r.error = e.what();
    if (e.partial_record()) r.record = *e.partial_record();
  }
  if (!r.unstable) {
    const NormTriple norms(s.problem);
    r.verdicts = evaluate_verdicts(s, r.record, norms);
    r.dissipation = dissipation_check(s, r.record);
  }
  r.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

inline ScenarioResult run_scenario(const ScenarioConfig& config) {
  return run_scenario(build_scenario(config));
}

inline nlohmann::ordered_json classification_json(const SourceClassification& c) {
  return {{"alpha", c.alpha},
          {"op", c.op},
          {"square_th2", c.square_th2},
          {"square_th3", c.square_th3},
          {"nu_max", c.nu_max ? detail::number(*c.nu_max) : nullptr},
          {"nu_max_attained", c.nu_max_attained}};
}

/// Deterministic verdict block (no timing).
inline nlohmann::ordered_json to_json(const ScenarioResult& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  j["digest"] = r.digest;
  j["status"] = r.status();
  j["probe"] = r.probe;
  j["classification"] = classification_json(r.classification);
  j["integrator"] = {{"dt", r.integrator.dt},
                     {"t_end", r.integrator.t_end},
                     {"sample_stride", r.integrator.sample_stride}};
  if (r.unstable) j["error"] = r.error;
  auto verdicts = nlohmann::ordered_json::array();
  for (const auto& v : r.verdicts) {
    nlohmann::ordered_json jv;
    jv["theorem"] = v.name;
    if (v.nu) jv["nu"] = *v.nu;
    jv["status"] = to_string(v.status);
    jv["applicable"] = v.applicable;
    jv["observed"] = v.observed;
    jv["unmet"] = v.unmet;
    jv["details"] = v.details;
    verdicts.push_back(std::move(jv));
  }
  j["verdicts"] = std::move(verdicts);
  j["dissipation"] = {{"quantity", r.dissipation.quantity},
                      {"max_increase", detail::number(r.dissipation.max_increase)},
                      {"violations", r.dissipation.violations},
                      {"min_energy", detail::number(r.dissipation.min_energy)},
                      {"ok", r.dissipation.ok}};
  if (!r.record.empty()) {
    j["final"] = {{"t", r.record.t.back()},
                  {"E0", detail::number(r.record.E.front())},
                  {"E", detail::number(r.record.E.back())},
                  {"p", detail::number(r.record.p.back())},
                  {"dist_V", detail::number(r.record.dist_V.back())},
                  {"samples", r.record.size()}};
  }
  return j;
}

}  // namespace vandamp
