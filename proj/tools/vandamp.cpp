// vandamp: run scenarios and theorem suites, check the lemma, fit recorded series.
//
// Exit codes: 0 pass, 1 verdict failure (also bad configs and usage),
// 2 numerical instability, 3 I/O.

#include "vandamp/vandamp.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <string>

namespace fs = std::filesystem;
using namespace vandamp;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUnstable = 2;
constexpr int kIo = 3;

ScenarioConfig load_config(const std::string& path) { return parse_config(read_text_file(path)); }

void print_classification(const SourceClassification& c) {
  std::cout << "  source: alpha = " << format_real(c.alpha) << ", (op) " << (c.op ? "holds" : "fails")
            << ", int (1+t)^(3 alpha)|g|^2 " << (c.square_th2 ? "finite" : "infinite")
            << ", int (1+t)^(2 alpha + 1)|g|^2 " << (c.square_th3 ? "finite" : "infinite") << "\n";
  if (c.nu_max)
    std::cout << "  prop1 rates: nu < " << *c.nu_max
              << (c.nu_max_attained ? " (endpoint included)" : "") << "\n";
  else
    std::cout << "  prop1 rates: every nu < 1 + alpha\n";
}

int cmd_run(const std::string& path, const std::string& out_dir) {
  const Scenario scenario = build_scenario(load_config(path));
  const ScenarioResult result = run_scenario(scenario);
  const fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
  const fs::path csv = scenario.config.output.csv.empty() ? dir / (result.name + ".csv")
                                                          : fs::path(scenario.config.output.csv);
  emit_csv(result.record, csv.string());
  write_text_file((dir / (result.name + ".json")).string(), to_json(result).dump(2) + "\n");

  std::cout << result.name << " [" << result.digest << "]\n";
  print_classification(result.classification);
  if (result.unstable) std::cout << "  unstable: " << result.error << "\n";
  for (const auto& v : result.verdicts) {
    std::cout << "  " << v.name;
    if (v.nu) std::cout << " (nu = " << format_real(*v.nu) << ")";
    std::cout << ": " << to_string(v.status);
    if (!v.unmet.empty()) std::cout << " (unmet: " << v.unmet.front() << ")";
    std::cout << "\n";
  }
  if (!result.unstable)
    std::cout << "  dissipation (" << result.dissipation.quantity
              << "): " << (result.dissipation.ok ? "ok" : "violated") << "\n";
  std::cout << "status: " << result.status() << "  csv: " << csv.string()
            << "  wall: " << result.wall_seconds << " s\n";
  return result.exit_code();
}

int cmd_suite(const std::string& name, const std::string& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  const SuiteReport report = run_suite(name);
  const fs::path dir = out_dir.empty() ? fs::path("vandamp-out") / name : fs::path(out_dir);
  write_suite(report, dir);
  for (const auto& s : report.scenarios)
    std::cout << s.name << ": " << s.status() << "  (" << s.wall_seconds << " s)\n";
  if (!report.lemma1.empty()) {
    std::size_t passed = 0;
    for (const auto& c : report.lemma1) passed += c.pass ? 1 : 0;
    std::cout << "lemma1 lattice: " << passed << "/" << report.lemma1.size() << " cells pass\n";
  }
  for (const auto& e : report.errors) std::cout << "error: " << e << "\n";
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const int code = report.exit_code();
  std::cout << "suite " << name << ": " << (code == 0 ? "pass" : code == 2 ? "unstable" : "fail")
            << "  summary: " << (dir / "summary.json").string() << "  wall: " << wall << " s\n";
  return code;
}

int cmd_lemma1(double K, double alpha, double tau) {
  const auto schedule = DampingSchedule::power(K, alpha);
  const Lemma1Result r = lemma1_check(schedule, tau);
  std::cout << "tau0 = " << format_real(tau0(schedule)) << "\n"
            << "lhs  = " << format_real(r.lhs) << "  (tail bound " << format_real(r.tail_bound)
            << " beyond T = " << format_real(r.horizon) << ")\n"
            << "rhs  = " << format_real(r.rhs) << "\n"
            << (r.pass ? "pass" : "fail") << "\n";
  return r.pass ? kPass : kFail;
}

int cmd_classify(const std::string& path) {
  const Scenario s = build_scenario(load_config(path));
  std::cout << s.config.output.name << " [" << config_digest(s.config) << "]\n"
            << "  problem: " << s.problem.family() << ", n = " << s.problem.dimension()
            << ", Phi even: " << (s.problem.is_even() ? "yes" : "no")
            << ", interior minimizers: " << (s.problem.has_interior_minimizers() ? "yes" : "no")
            << ", coercive: " << (s.bounded_by_coercivity ? "yes" : "no") << "\n"
            << "  integrator: dt = " << format_real(s.integrator.dt)
            << ", t_end = " << format_real(s.integrator.t_end) << "\n";
  std::cout << "  damping: (h1) " << (s.damping.h1.holds ? "holds" : "fails")
            << ", (h2) " << (s.damping.h2.holds ? "holds" : "fails") << " on the check grid\n";
  print_classification(s.classification);
  if (s.probe) std::cout << "  (op) fails: probe scenario, verdicts are informational\n";
  for (const auto& h : hypothesis_report(s)) {
    std::cout << "  " << h.name;
    if (h.nu) std::cout << " (nu = " << format_real(*h.nu) << ")";
    if (h.unmet.empty() && !s.probe) {
      std::cout << ": applicable\n";
    } else {
      std::cout << ": probe";
      for (const auto& u : h.unmet) std::cout << "; unmet: " << u;
      std::cout << "\n";
    }
  }
  return kPass;
}

int cmd_fit(const std::string& path, double nu, double window) {
  const EnergyRecord record = record_from_csv(parse_csv(read_text_file(path)));
  const TrendResult trend = scaled_energy_trend(record, nu);
  std::cout << "trend at nu = " << format_real(nu) << ": ratio " << format_real(trend.ratio);
  if (trend.slope_available) std::cout << ", log-log slope " << format_real(trend.slope);
  std::cout << " -> " << (trend.pass ? "pass" : "fail") << "\n";
  try {
    const DecayFit f = decay_fit(record, Quantity::E, window, nu);
    std::cout << "fit on [" << format_real(f.t_a) << ", " << format_real(f.t_b)
              << "]: slope " << format_real(f.slope) << ", correlation " << format_real(f.correlation)
              << " -> " << to_string(f.verdict) << "\n";
  } catch (const std::exception& e) {
    std::cout << "fit: " << e.what() << "\n";
  }
  bool ok = trend.pass;
  for (std::size_t i = 0; i < record.nu.size(); ++i)
    if (std::abs(record.nu[i] - nu) <= 1e-12) {
      const IntegralVerdict v = velocity_integral_verdict(record, nu);
      std::cout << "I_nu: terminal " << format_real(v.terminal) << ", last-decade growth "
                << format_real(v.last_decade_growth) << " -> " << (v.bounded ? "bounded" : "growing")
                << "\n";
      ok = ok && v.bounded;
    }
  return ok ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator and verification harness for u'' + gamma(t) u' + A u + f(u) = g(t)"};
  app.require_subcommand(1);

  std::string config_path, suite_name, out_dir, csv_path;
  double K = 0.0, alpha = 0.0, tau = 0.0, nu = 0.0, window = 0.5;

  auto* run = app.add_subcommand("run", "Integrate one scenario, write CSV and verdicts");
  run->add_option("config", config_path, "Scenario config file")->required();
  run->add_option("--out", out_dir, "Output directory (default: current directory)");

  auto* suite = app.add_subcommand("suite", "Run a pinned scenario matrix");
  suite->add_option("name", suite_name, "Suite name")
      ->required()
      ->check(CLI::IsMember(suite_names()));
  suite->add_option("--out", out_dir, "Output directory (default: vandamp-out/<name>)");

  auto* lemma = app.add_subcommand("lemma1", "Check the exponential-integral bound at one point");
  lemma->add_option("--K", K, "Damping constant")->required();
  lemma->add_option("--alpha", alpha, "Damping exponent in [0, 1)")->required();
  lemma->add_option("--tau", tau, "Lower limit, at least tau0")->required();

  auto* classify = app.add_subcommand("classify", "Print the hypothesis report of a scenario");
  classify->add_option("config", config_path, "Scenario config file")->required();

  auto* fit = app.add_subcommand("fit", "Decay-rate verdicts on a recorded CSV");
  fit->add_option("csv", csv_path, "CSV written by run or suite")->required();
  fit->add_option("--nu", nu, "Rate exponent")->required();
  fit->add_option("--window", window, "Fit window fraction")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kFail;
  }

  try {
    if (*run) return cmd_run(config_path, out_dir);
    if (*suite) return cmd_suite(suite_name, out_dir);
    if (*lemma) return cmd_lemma1(K, alpha, tau);
    if (*classify) return cmd_classify(config_path);
    if (*fit) return cmd_fit(csv_path, nu, window);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const StabilityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUnstable;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  }
  return kFail;
}
