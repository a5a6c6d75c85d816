#pragma once

// Pinned scenario matrices and their concurrent execution.

#include "vandamp/diagnostics/lemma1.hpp"
#include "vandamp/runner/csv.hpp"
#include "vandamp/runner/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace vandamp {

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"theorem1", "theorem2", "theorem3", "theorem4", "prop1",
                                              "lemma1",   "wave",     "probes",   "all"};
  return names;
}

namespace detail {

inline std::string tag(double x) { return format_real(x); }

inline ScenarioConfig base_config(const std::string& name, int n, double alpha, double K) {
  ScenarioConfig c;
  c.output.name = name;
  c.problem.family = "quadratic";
  c.problem.dimension = n;
  c.problem.lambda_min = 1.0;
  c.problem.lambda_max = 4.0;
  c.damping.K = K;
  c.damping.alpha = alpha;
  c.integrator.dt = 5e-3;
  c.integrator.t_end = 1e4;
  c.integrator.sample_stride = 100;
  c.diagnostics.nu = {2.0 * alpha};
  return c;
}

inline void power_source(ScenarioConfig& c, double amplitude, double beta) {
  c.source.family = "power_decay";
  c.source.amplitude = amplitude;
  c.source.beta = beta;
}

}  // namespace detail

/// Scenario configs of a suite, in report order. The lemma1 suite has none.
inline std::vector<ScenarioConfig> suite_scenarios(const std::string& name) {
  using detail::tag;
  std::vector<ScenarioConfig> out;
  if (name == "theorem1") {
    for (double a : {0.25, 0.5, 0.75})
      for (int n : {1, 4}) {
        auto c = detail::base_config("theorem1_a" + tag(a) + "_n" + std::to_string(n), n, a, 2.0);
        detail::power_source(c, 0.5, 1.2 + a);
        out.push_back(c);
      }
  } else if (name == "theorem2") {
    // u bounded is not assumed here: one cell has a singular operator
    for (double a : {0.25, 0.5})
      for (bool singular : {false, true}) {
        auto c = detail::base_config(std::string("theorem2_a") + tag(a) + (singular ? "_singular" : "_shifted"),
                                     4, a, 2.0);
        if (singular) c.problem.lambda_min = 0.0;
        else c.problem.shift = 2.0;
        detail::power_source(c, 0.5, 2.0 + a);
        out.push_back(c);
      }
  } else if (name == "theorem3") {
    for (double a : {0.25, 0.5})
      for (int n : {1, 4}) {
        auto c = detail::base_config("theorem3_a" + tag(a) + "_n" + std::to_string(n), n, a, 2.0);
        c.problem.family = "shifted_quartic";
        c.problem.coefficient = 1.0;
        detail::power_source(c, 0.5, 2.0);
        out.push_back(c);
      }
  } else if (name == "theorem4") {
    for (double a : {0.25, 0.5}) {
      auto c = detail::base_config("theorem4_a" + tag(a) + "_n4", 4, a, 2.0);
      c.problem.family = "flat_basin";
      c.problem.width = 1.0;
      c.initial.offset = 3.0;
      detail::power_source(c, 0.1, 3.0);
      out.push_back(c);
    }
  } else if (name == "prop1") {
    for (int n : {1, 4}) {
      auto c = detail::base_config("prop1_n" + std::to_string(n), n, 0.5, 2.0);
      detail::power_source(c, 0.5, 1.75);
      c.diagnostics.nu = {1.0, 1.3};
      out.push_back(c);
    }
  } else if (name == "wave") {
    auto c = detail::base_config("wave_n64", 64, 0.5, 3.0);
    c.problem.family = "wave";
    c.problem.nonlinearity = "cubic";
    c.problem.coefficient = 1.0;
    c.source.family = "exp_decay";
    c.source.amplitude = 0.5;
    c.source.rate = 0.1;
    c.initial.profile = "bump";
    c.initial.offset = 1.0;
    c.integrator.dt = 1e-2;
    c.integrator.t_end = 5e3;
    c.diagnostics.nu = {1.0};
    out.push_back(c);
  } else if (name == "probes") {
    for (int n : {1, 4}) {
      auto c = detail::base_config("probe_b1.2_a0.5_n" + std::to_string(n), n, 0.5, 2.0);
      detail::power_source(c, 0.5, 1.2);
      out.push_back(c);
    }
  } else if (name == "all") {
    for (const auto& s : suite_names())
      if (s != "all")
        for (auto& c : suite_scenarios(s)) out.push_back(std::move(c));
  } else if (name != "lemma1") {
    throw InputError("unknown suite '" + name + "'");
  }
  return out;
}

struct Lemma1Cell {
  double K = 0.0;
  double alpha = 0.0;
  double tau = 0.0;
  Lemma1Result result;
  std::optional<double> exact;  // 1/K when alpha = 0
  bool pass = false;
};

/// K in {0.5, 1, 2} x alpha in {0, 0.3, 0.5, 0.7} x tau = tau0 + offset, 120 cells.
/// An alpha = 0 cell also has to match the exact value 1/K to 1e-9.
inline std::vector<Lemma1Cell> lemma1_lattice() {
  std::vector<Lemma1Cell> cells;
  for (double K : {0.5, 1.0, 2.0})
    for (double a : {0.0, 0.3, 0.5, 0.7}) {
      const auto schedule = DampingSchedule::power(K, a);
      const double start = tau0(schedule);
      for (double off : {0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 1000.0}) {
        Lemma1Cell cell{K, a, start + off, {}, {}, false};
        cell.result = lemma1_check(schedule, cell.tau);
        cell.pass = cell.result.pass;
        if (a == 0.0) {
          cell.exact = 1.0 / K;
          cell.pass = cell.pass && std::abs(cell.result.lhs - *cell.exact) <= 1e-9;
        }
        cells.push_back(cell);
      }
    }
  return cells;
}

/// Concurrency cap: VANDAMP_THREADS if set to a positive integer, else the hardware count.
inline unsigned thread_cap() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("VANDAMP_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return hw;
}

/// Runs job(i) for i in [0, count) on at most `threads` workers.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& job) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) job(i);
    });
  for (auto& t : pool) t.join();
}

struct SuiteReport {
  std::string name;
  std::vector<ScenarioResult> scenarios;
  std::vector<Lemma1Cell> lemma1;
  std::vector<std::string> errors;  // scenarios that could not be built

  bool lemma1_pass() const {
    return std::all_of(lemma1.begin(), lemma1.end(), [](const Lemma1Cell& c) { return c.pass; });
  }

  /// 0 pass, 1 verdict failure or build error, 2 instability (when nothing failed).
  int exit_code() const {
    bool unstable = false, failed = !errors.empty() || !lemma1_pass();
    for (const auto& r : scenarios) {
      unstable = unstable || r.exit_code() == 2;
      failed = failed || r.exit_code() == 1;
    }
    return failed ? 1 : unstable ? 2 : 0;
  }
};

inline SuiteReport run_suite(const std::string& name, unsigned threads = thread_cap()) {
  SuiteReport report;
  report.name = name;
  if (name == "lemma1" || name == "all") report.lemma1 = lemma1_lattice();
  const auto configs = suite_scenarios(name);
  report.scenarios.resize(configs.size());
  std::vector<std::string> errors(configs.size());
  parallel_for(configs.size(), threads, [&](std::size_t i) {
    try {
      report.scenarios[i] = run_scenario(configs[i]);
    } catch (const std::exception& e) {
      errors[i] = configs[i].output.name + ": " + e.what();
      report.scenarios[i].name = configs[i].output.name;
    }
  });
  for (std::size_t i = configs.size(); i-- > 0;)
    if (!errors[i].empty()) {
      report.errors.insert(report.errors.begin(), errors[i]);
      report.scenarios.erase(report.scenarios.begin() + static_cast<std::ptrdiff_t>(i));
    }
  return report;
}

inline nlohmann::ordered_json to_json(const Lemma1Cell& c) {
  nlohmann::ordered_json j{{"K", c.K},
                           {"alpha", c.alpha},
                           {"tau", c.tau},
                           {"lhs", c.result.lhs},
                           {"rhs", c.result.rhs},
                           {"tail_bound", c.result.tail_bound},
                           {"horizon", c.result.horizon}};
  if (c.exact) j["exact"] = *c.exact;
  j["pass"] = c.pass;
  return j;
}

/// Deterministic report: no timing, fixed key and scenario order.
inline nlohmann::ordered_json to_json(const SuiteReport& r) {
  nlohmann::ordered_json j;
  j["suite"] = r.name;
  const int code = r.exit_code();
  j["status"] = code == 0 ? "pass" : code == 2 ? "unstable" : "fail";
  auto scenarios = nlohmann::ordered_json::array();
  for (const auto& s : r.scenarios) scenarios.push_back(to_json(s));
  j["scenarios"] = std::move(scenarios);
  if (!r.lemma1.empty()) {
    auto cells = nlohmann::ordered_json::array();
    for (const auto& c : r.lemma1) cells.push_back(to_json(c));
    j["lemma1"] = {{"cells", r.lemma1.size()}, {"pass", r.lemma1_pass()}, {"lattice", std::move(cells)}};
  }
  if (!r.errors.empty()) j["errors"] = r.errors;
  return j;
}

/// summary.json plus <scenario>.csv for each scenario, into `dir`.
inline void write_suite(const SuiteReport& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
  for (const auto& s : r.scenarios) emit_csv(s.record, (dir / (s.name + ".csv")).string());
  write_text_file((dir / "summary.json").string(), to_json(r).dump(2) + "\n");
}

}  // namespace vandamp
