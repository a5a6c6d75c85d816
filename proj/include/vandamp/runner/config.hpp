#pragma once

// Scenario files: line-oriented `key = value` pairs under `[section]` headers,
// `#` starts a comment. Lists are comma separated. Parsing collects every
// problem it finds before failing.
//
//   [problem]     family, dimension, lambda_min, lambda_max, seed, shift,
//                 coefficient, nonlinearity, width
//   [damping]     kind, K, alpha, t0, scale, times, values
//   [source]      family, amplitude, beta, rate, frequency, seed
//   [initial]     profile, seed, offset, velocity
//   [integrator]  dt, t_end, sample_stride, stability_margin
//   [diagnostics] nu, window_fraction, checkpoints
//   [output]      name, csv

#include "vandamp/core.hpp"
#include "vandamp/runner/format.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace vandamp {

class ConfigError : public InputError {
 public:
  explicit ConfigError(std::vector<std::string> errors)
      : InputError(join(errors)), errors_(std::move(errors)) {}
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  static std::string join(const std::vector<std::string>& errors) {
    std::string out = "invalid scenario config:";
    for (const auto& e : errors) out += "\n  " + e;
    return out;
  }
  std::vector<std::string> errors_;
};

struct ProblemConfig {
  std::string family = "quadratic";  // quadratic | shifted_quartic | wave | flat_basin
  int dimension = 1;
  double lambda_min = 1.0;
  double lambda_max = 1.0;
  std::uint64_t seed = 1;
  double shift = 0.0;
  double coefficient = 1.0;
  std::string nonlinearity = "cubic";  // wave only: none | linear | cubic
  double width = 1.0;                  // flat_basin only
};

struct DampingConfig {
  std::string kind = "power";  // power | scaled_power | tabulated
  double K = 1.0;
  double alpha = 0.0;
  double t0 = 0.0;
  double scale = 1.0;
  std::vector<double> times;
  std::vector<double> values;
};

struct SourceConfig {
  std::string family = "zero";  // zero | power_decay | exp_decay | modulated_power
  double amplitude = 0.0;
  double beta = 2.0;
  double rate = 1.0;
  double frequency = 1.0;
  std::uint64_t seed = 2;
};

struct InitialConfig {
  std::string profile = "random";  // random | bump
  std::uint64_t seed = 3;
  double offset = 1.0;    // |u(0) - u_bar|_H (random) or bump height
  double velocity = 0.0;  // |u'(0)|_H
};

struct IntegratorSection {
  std::optional<double> dt;  // default: min(1e-2, stability limit), snapped to the grid
  double t_end = 0.0;
  int sample_stride = 1;
  double stability_margin = 0.5;
};

struct DiagnosticsConfig {
  std::vector<double> nu;  // default {2 alpha}
  double window_fraction = 0.5;
  int checkpoints = 16;
};

struct OutputConfig {
  std::string name = "scenario";
  std::string csv;  // empty: <name>.csv next to the other outputs
};

struct ScenarioConfig {
  ProblemConfig problem;
  DampingConfig damping;
  SourceConfig source;
  InitialConfig initial;
  IntegratorSection integrator;
  DiagnosticsConfig diagnostics;
  OutputConfig output;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct RawEntry {
  std::string value;
  int line = 0;
};

using RawSection = std::map<std::string, RawEntry>;

inline const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"problem",
       {"family", "dimension", "lambda_min", "lambda_max", "seed", "shift", "coefficient",
        "nonlinearity", "width"}},
      {"damping", {"kind", "K", "alpha", "t0", "scale", "times", "values"}},
      {"source", {"family", "amplitude", "beta", "rate", "frequency", "seed"}},
      {"initial", {"profile", "seed", "offset", "velocity"}},
      {"integrator", {"dt", "t_end", "sample_stride", "stability_margin"}},
      {"diagnostics", {"nu", "window_fraction", "checkpoints"}},
      {"output", {"name", "csv"}},
  };
  return keys;
}

class Reader {
 public:
  Reader(const std::map<std::string, RawSection>& sections, std::vector<std::string>& errors)
      : sections_(sections), errors_(errors) {}

  const RawEntry* find(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  }

  bool has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
  }

  void real(const std::string& section, const std::string& key, double& out) {
    if (const auto* e = find(section, key)) {
      if (auto v = parse_real(e->value)) out = *v;
      else error(*e, section, key, "expected a number, got '" + e->value + "'");
    }
  }

  void integer(const std::string& section, const std::string& key, int& out) {
    if (const auto* e = find(section, key)) {
      int v = 0;
      const char* end = e->value.data() + e->value.size();
      auto [ptr, ec] = std::from_chars(e->value.data(), end, v);
      if (ec != std::errc{} || ptr != end) error(*e, section, key, "expected an integer, got '" + e->value + "'");
      else out = v;
    }
  }

  void seed(const std::string& section, const std::string& key, std::uint64_t& out) {
    if (const auto* e = find(section, key)) {
      std::uint64_t v = 0;
      const char* end = e->value.data() + e->value.size();
      auto [ptr, ec] = std::from_chars(e->value.data(), end, v);
      if (ec != std::errc{} || ptr != end)
        error(*e, section, key, "expected an unsigned 64-bit integer, got '" + e->value + "'");
      else out = v;
    }
  }

  void text(const std::string& section, const std::string& key, std::string& out) {
    if (const auto* e = find(section, key)) out = e->value;
  }

  void list(const std::string& section, const std::string& key, std::vector<double>& out) {
    if (const auto* e = find(section, key)) {
      out.clear();
      std::stringstream ss(e->value);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (auto v = parse_real(trim(item))) out.push_back(*v);
        else {
          error(*e, section, key, "expected a comma-separated list of numbers");
          return;
        }
      }
    }
  }

  void error(const RawEntry& e, const std::string& section, const std::string& key,
             const std::string& what) {
    errors_.push_back("line " + std::to_string(e.line) + ": [" + section + "] " + key + ": " + what);
  }

  static std::optional<double> parse_real(const std::string& s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const char* begin = s.data() + (s[0] == '+' ? 1 : 0);
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end || !std::isfinite(v)) return std::nullopt;
    return v;
  }

 private:
  const std::map<std::string, RawSection>& sections_;
  std::vector<std::string>& errors_;
};

}  // namespace detail

/// Parses and validates a scenario. Throws ConfigError listing every problem found.
inline ScenarioConfig parse_config(std::string_view text) {
  std::vector<std::string> errors;
  std::map<std::string, detail::RawSection> sections;
  const auto& keys = detail::known_keys();

  std::string current;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string line = detail::trim(raw);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back(where + "malformed section header '" + line + "'");
        continue;
      }
      current = detail::trim(std::string_view(line).substr(1, line.size() - 2));
      if (!keys.count(current)) errors.push_back(where + "unknown section [" + current + "]");
      else if (sections.count(current)) errors.push_back(where + "duplicate section [" + current + "]");
      sections[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back(where + "expected 'key = value', got '" + line + "'");
      continue;
    }
    const std::string key = detail::trim(std::string_view(line).substr(0, eq));
    const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
    if (current.empty()) {
      errors.push_back(where + "key '" + key + "' appears before any section header");
      continue;
    }
    auto known = keys.find(current);
    if (known == keys.end()) continue;  // already reported
    if (!known->second.count(key)) {
      errors.push_back(where + "unknown key '" + key + "' in [" + current + "]");
      continue;
    }
    if (value.empty()) {
      errors.push_back(where + "[" + current + "] " + key + ": missing value");
      continue;
    }
    if (sections[current].count(key)) {
      errors.push_back(where + "duplicate key '" + key + "' in [" + current + "]");
      continue;
    }
    sections[current][key] = {value, line_no};
  }

  for (const char* required : {"problem", "damping", "integrator"})
    if (!sections.count(required)) errors.push_back(std::string("missing section [") + required + "]");

  ScenarioConfig c;
  detail::Reader r(sections, errors);

  auto& p = c.problem;
  r.text("problem", "family", p.family);
  r.integer("problem", "dimension", p.dimension);
  r.real("problem", "lambda_min", p.lambda_min);
  r.real("problem", "lambda_max", p.lambda_max);
  r.seed("problem", "seed", p.seed);
  r.real("problem", "shift", p.shift);
  r.real("problem", "coefficient", p.coefficient);
  r.text("problem", "nonlinearity", p.nonlinearity);
  r.real("problem", "width", p.width);

  auto& d = c.damping;
  r.text("damping", "kind", d.kind);
  r.real("damping", "K", d.K);
  r.real("damping", "alpha", d.alpha);
  r.real("damping", "t0", d.t0);
  r.real("damping", "scale", d.scale);
  r.list("damping", "times", d.times);
  r.list("damping", "values", d.values);

  auto& s = c.source;
  r.text("source", "family", s.family);
  r.real("source", "amplitude", s.amplitude);
  r.real("source", "beta", s.beta);
  r.real("source", "rate", s.rate);
  r.real("source", "frequency", s.frequency);
  r.seed("source", "seed", s.seed);

  auto& in = c.initial;
  r.text("initial", "profile", in.profile);
  r.seed("initial", "seed", in.seed);
  r.real("initial", "offset", in.offset);
  r.real("initial", "velocity", in.velocity);

  auto& it = c.integrator;
  if (r.has("integrator", "dt")) {
    double dt = 0.0;
    r.real("integrator", "dt", dt);
    it.dt = dt;
  }
  r.real("integrator", "t_end", it.t_end);
  r.integer("integrator", "sample_stride", it.sample_stride);
  r.real("integrator", "stability_margin", it.stability_margin);

  auto& dg = c.diagnostics;
  r.list("diagnostics", "nu", dg.nu);
  r.real("diagnostics", "window_fraction", dg.window_fraction);
  r.integer("diagnostics", "checkpoints", dg.checkpoints);

  r.text("output", "name", c.output.name);
  r.text("output", "csv", c.output.csv);

  // range checks and cross references
  auto bad = [&](const std::string& what) { errors.push_back(what); };
  const std::set<std::string> families{"quadratic", "shifted_quartic", "wave", "flat_basin"};
  if (!families.count(p.family)) bad("[problem] family: unknown family '" + p.family + "'");
  if (p.family == "wave") {
    if (p.dimension < 2) bad("[problem] dimension: wave needs at least 2 interior nodes");
    if (p.nonlinearity != "none" && p.nonlinearity != "linear" && p.nonlinearity != "cubic")
      bad("[problem] nonlinearity: expected none, linear or cubic");
    if (!(p.coefficient >= 0.0)) bad("[problem] coefficient: must be >= 0 (f nondecreasing)");
  } else if (p.dimension < 1) {
    bad("[problem] dimension: must be >= 1");
  }
  if (p.family == "quadratic" || p.family == "shifted_quartic") {
    if (!(p.lambda_min >= 0.0 && p.lambda_max >= p.lambda_min))
      bad("[problem] lambda_min/lambda_max: need 0 <= lambda_min <= lambda_max");
    if (p.family == "quadratic" && p.shift != 0.0 && !(p.lambda_min > 0.0))
      bad("[problem] shift: a shifted minimizer needs lambda_min > 0");
    if (p.family == "shifted_quartic" && !(p.coefficient >= 0.0))
      bad("[problem] coefficient: must be >= 0");
  }
  if (p.family == "flat_basin" && (!(p.width > 0.0) || !(p.coefficient > 0.0)))
    bad("[problem] width/coefficient: must be > 0");

  if (d.kind != "power" && d.kind != "scaled_power" && d.kind != "tabulated")
    bad("[damping] kind: expected power, scaled_power or tabulated");
  if (sections.count("damping")) {
    if (!r.has("damping", "K")) bad("[damping] K: required");
    if (!r.has("damping", "alpha")) bad("[damping] alpha: required");
  }
  if (!(d.K > 0.0)) bad("[damping] K: must be > 0");
  if (!(d.alpha >= 0.0 && d.alpha < 1.0))
    bad("[damping] alpha = " + format_real(d.alpha) + ": requires α ∈ [0,1)");
  if (!(d.t0 >= 0.0)) bad("[damping] t0: must be >= 0");
  if (d.kind == "scaled_power" && !(d.scale >= 1.0)) bad("[damping] scale: must be >= 1");
  if (d.kind != "scaled_power" && r.has("damping", "scale"))
    bad("[damping] scale: only valid with kind = scaled_power");
  if (d.kind == "tabulated") {
    if (d.times.empty() || d.times.size() != d.values.size())
      bad("[damping] times/values: tabulated damping needs matching nonempty lists");
    else if (d.times.front() != 0.0)
      bad("[damping] times: must start at 0");
  } else if (r.has("damping", "times") || r.has("damping", "values")) {
    bad("[damping] times/values: only valid with kind = tabulated");
  }

  const std::set<std::string> sources{"zero", "power_decay", "exp_decay", "modulated_power"};
  if (!sources.count(s.family)) bad("[source] family: unknown family '" + s.family + "'");
  if (!(s.amplitude >= 0.0)) bad("[source] amplitude: must be >= 0");
  if ((s.family == "power_decay" || s.family == "modulated_power") && !(s.beta > 0.0))
    bad("[source] beta: must be > 0");
  if (s.family == "exp_decay" && !(s.rate > 0.0)) bad("[source] rate: must be > 0");
  if (s.family == "modulated_power" && !(s.frequency > 0.0)) bad("[source] frequency: must be > 0");

  if (in.profile != "random" && in.profile != "bump") bad("[initial] profile: expected random or bump");
  if (in.profile == "bump" && p.family != "wave") bad("[initial] profile: bump needs the wave family");
  if (!(in.offset >= 0.0) || !(in.velocity >= 0.0))
    bad("[initial] offset/velocity: must be >= 0");

  if (sections.count("integrator") && !r.has("integrator", "t_end")) bad("[integrator] t_end: required");
  if (!(it.t_end >= 0.0)) bad("[integrator] t_end: must be >= 0");
  if (it.sample_stride < 1) bad("[integrator] sample_stride: must be >= 1");
  if (!(it.stability_margin > 0.0 && it.stability_margin <= 1.0))
    bad("[integrator] stability_margin: must lie in (0, 1]");
  if (it.dt) {
    if (!(*it.dt > 0.0)) {
      bad("[integrator] dt: must be > 0");
    } else if (it.t_end >= 0.0 && it.sample_stride >= 1) {
      const double steps = it.t_end / *it.dt;
      const double rounded = std::round(steps);
      if (std::abs(steps - rounded) > 1e-6)
        bad("[integrator] dt: t_end / dt must be an integer");
      else if (std::fmod(rounded, static_cast<double>(it.sample_stride)) != 0.0)
        bad("[integrator] sample_stride: must divide the step count t_end / dt");
    }
  }

  if (!r.has("diagnostics", "nu")) dg.nu = {2.0 * d.alpha};
  const bool alpha_ok = d.alpha >= 0.0 && d.alpha < 1.0;
  for (double nu : dg.nu) {
    if (alpha_ok && !(nu >= 0.0 && nu < 1.0 + d.alpha))
      bad("[diagnostics] nu = " + format_real(nu) + " is out of range: requires 0 <= ν < 1 + α = " +
          format_real(1.0 + d.alpha));
  }
  if (!(dg.window_fraction > 0.0 && dg.window_fraction <= 1.0))
    bad("[diagnostics] window_fraction: must lie in (0, 1]");
  if (dg.checkpoints < 4) bad("[diagnostics] checkpoints: need at least 4");

  if (c.output.name.empty() || c.output.name.find_first_of("/\\") != std::string::npos)
    bad("[output] name: must be a plain file stem");

  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

}  // namespace vandamp
