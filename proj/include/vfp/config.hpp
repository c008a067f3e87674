#pragma once

// Run configuration: INI-style `key = value` lines grouped in [sections].
// Comments start with '#' or ';'. Unknown sections or keys are errors, and
// every violation in a document is reported together.
//
//   [run]          experiment, output_dir, threads
//   [grid]         space_dim, points_per_axis, domain_length
//   [hermite]      degree_cap, velocity_dim, transverse_cap
//   [system]       mu, c0, gamma
//   [time]         t_end, dt, sample_every
//   [initial_data] generator, amplitude, seed
//   [analysis]     energy_order, r0, tau4, tau5, q, deriv_order, t_min, t_max,
//                  t_samples, mu_list, xi_list

#include "vfp/dynamics.hpp"
#include "vfp/initial_data.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vfp {

enum class Experiment { simulate, mode_sweep, semigroup_decay, micro_gap, inviscid_order, torus_decay, oracle_suite };

inline const std::map<std::string, Experiment>& experiment_names() {
  static const std::map<std::string, Experiment> m{
      {"simulate", Experiment::simulate},         {"mode_sweep", Experiment::mode_sweep},
      {"semigroup_decay", Experiment::semigroup_decay}, {"micro_gap", Experiment::micro_gap},
      {"inviscid_order", Experiment::inviscid_order},   {"torus_decay", Experiment::torus_decay},
      {"oracle_suite", Experiment::oracle_suite}};
  return m;
}

inline std::string to_string(Experiment e) {
  for (const auto& [name, value] : experiment_names())
    if (value == e) return name;
  return "?";
}

struct TimeConfig {
  double t_end = 10.0;
  double dt = 0.005;
  int sample_every = 20;
};

struct InitialConfig {
  std::string generator = "prepared_smooth";
  double amplitude = 1e-2;
  std::uint64_t seed = 0;
};

struct AnalysisConfig {
  int energy_order = 3;
  double r0 = 1.0;
  double tau4 = 0.1;
  double tau5 = 0.01;
  double q = 1.0;
  int deriv_order = 0;
  double t_min = 1e2;
  double t_max = 1e4;
  int t_samples = 30;
  std::vector<double> mu_list{0.04, 0.02, 0.01, 0.005};
  std::vector<double> xi_list{0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0};
};

struct RunConfig {
  Experiment experiment = Experiment::simulate;
  std::string output_dir = "out";
  int threads = 1;
  SpatialGrid grid;
  HermiteSpec hermite;
  SystemParams system;
  TimeConfig time;
  InitialConfig initial;
  AnalysisConfig analysis;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> v) : std::runtime_error(join(v)), violations_(std::move(v)) {}
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : "\n") + x;
    return s;
  }
  std::vector<std::string> violations_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T v{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return v;
}

using Setter = std::function<std::optional<std::string>(RunConfig&, std::string_view)>;

template <typename T, typename Member>
Setter number(Member m) {
  return [m](RunConfig& c, std::string_view v) -> std::optional<std::string> {
    const auto x = parse_number<T>(v);
    if (!x) return std::string(std::is_integral_v<T> ? "expected an integer" : "expected a number");
    std::invoke(m, c) = *x;
    return std::nullopt;
  };
}

inline const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> m{
      {"run.experiment",
       [](RunConfig& c, std::string_view v) -> std::optional<std::string> {
         const auto it = experiment_names().find(std::string(v));
         if (it == experiment_names().end()) return "unknown experiment '" + std::string(v) + "'";
         c.experiment = it->second;
         return std::nullopt;
       }},
      {"run.output_dir",
       [](RunConfig& c, std::string_view v) -> std::optional<std::string> {
         c.output_dir = std::string(v);
         return std::nullopt;
       }},
      {"run.threads", number<int>([](RunConfig& c) -> auto& { return c.threads; })},
      {"grid.space_dim", number<int>([](RunConfig& c) -> auto& { return c.grid.dim; })},
      {"grid.points_per_axis", number<int>([](RunConfig& c) -> auto& { return c.grid.points; })},
      {"grid.domain_length", number<double>([](RunConfig& c) -> auto& { return c.grid.length; })},
      {"hermite.degree_cap", number<int>([](RunConfig& c) -> auto& { return c.hermite.degree_cap; })},
      {"hermite.velocity_dim", number<int>([](RunConfig& c) -> auto& { return c.hermite.velocity_dim; })},
      {"hermite.transverse_cap", number<int>([](RunConfig& c) -> auto& { return c.hermite.transverse_cap; })},
      {"system.mu", number<double>([](RunConfig& c) -> auto& { return c.system.mu; })},
      {"system.c0", number<double>([](RunConfig& c) -> auto& { return c.system.c0; })},
      {"system.gamma", number<double>([](RunConfig& c) -> auto& { return c.system.gamma; })},
      {"time.t_end", number<double>([](RunConfig& c) -> auto& { return c.time.t_end; })},
      {"time.dt", number<double>([](RunConfig& c) -> auto& { return c.time.dt; })},
      {"time.sample_every", number<int>([](RunConfig& c) -> auto& { return c.time.sample_every; })},
      {"initial_data.generator",
       [](RunConfig& c, std::string_view v) -> std::optional<std::string> {
         try {
           parse_initial_kind(std::string(v));
         } catch (const InvalidArgument& e) {
           return std::string(e.what());
         }
         c.initial.generator = std::string(v);
         return std::nullopt;
       }},
      {"initial_data.amplitude", number<double>([](RunConfig& c) -> auto& { return c.initial.amplitude; })},
      {"initial_data.seed", number<std::uint64_t>([](RunConfig& c) -> auto& { return c.initial.seed; })},
      {"analysis.energy_order", number<int>([](RunConfig& c) -> auto& { return c.analysis.energy_order; })},
      {"analysis.r0", number<double>([](RunConfig& c) -> auto& { return c.analysis.r0; })},
      {"analysis.tau4", number<double>([](RunConfig& c) -> auto& { return c.analysis.tau4; })},
      {"analysis.tau5", number<double>([](RunConfig& c) -> auto& { return c.analysis.tau5; })},
      {"analysis.q", number<double>([](RunConfig& c) -> auto& { return c.analysis.q; })},
      {"analysis.deriv_order", number<int>([](RunConfig& c) -> auto& { return c.analysis.deriv_order; })},
      {"analysis.t_min", number<double>([](RunConfig& c) -> auto& { return c.analysis.t_min; })},
      {"analysis.t_max", number<double>([](RunConfig& c) -> auto& { return c.analysis.t_max; })},
      {"analysis.t_samples", number<int>([](RunConfig& c) -> auto& { return c.analysis.t_samples; })},
  };
  return m;
}

inline std::optional<std::string> parse_list(std::string_view v, std::vector<double>& out) {
  std::vector<double> r;
  while (true) {
    const auto comma = v.find(',');
    const auto item = trim(v.substr(0, comma));
    const auto x = parse_number<double>(item);
    if (!x) return "expected a comma-separated list of numbers";
    r.push_back(*x);
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  out = std::move(r);
  return std::nullopt;
}

inline void validate_ranges(const RunConfig& c, std::vector<std::string>& errors) {
  auto check = [&](auto&& fn) {
    try {
      fn();
    } catch (const InvalidArgument& e) {
      errors.emplace_back(e.what());
    }
  };
  check([&] { c.grid.validate(); });
  check([&] { c.hermite.validate(); });
  for (const auto& p : {SystemParams{c.system.mu, 1.0, 2.0}, SystemParams{0.0, c.system.c0, 2.0},
                        SystemParams{0.0, 1.0, c.system.gamma}})
    check([&] { p.validate(); });
  if (c.grid.dim != c.hermite.velocity_dim) errors.emplace_back("space_dim must equal velocity_dim");
  if (c.threads < 1) errors.emplace_back("threads must be at least 1");
  if (!(c.time.t_end >= 0.0)) errors.emplace_back("t_end must be nonnegative");
  if (!(c.time.dt > 0.0)) errors.emplace_back("dt must be positive");
  if (c.time.sample_every < 1) errors.emplace_back("sample_every must be at least 1");
  if (!(c.initial.amplitude >= 0.0) || c.initial.amplitude > 0.1) errors.emplace_back("amplitude must lie in [0, 0.1]");
  const auto& a = c.analysis;
  if (a.energy_order < 0 || a.energy_order > 3) errors.emplace_back("energy_order must lie in [0, 3]");
  if (!(a.r0 > 0.0)) errors.emplace_back("r0 must be positive");
  if (!(a.tau4 >= 0.0) || !(a.tau5 >= 0.0)) errors.emplace_back("tau4 and tau5 must be nonnegative");
  if (!(a.q >= 1.0 && a.q < 1.2)) errors.emplace_back("q must lie in [1, 6/5)");
  if (a.deriv_order != 0 && a.deriv_order != 1) errors.emplace_back("deriv_order must be 0 or 1");
  if (!(a.t_min > 0.0) || !(a.t_max > a.t_min)) errors.emplace_back("need 0 < t_min < t_max");
  if (a.t_samples < 10) errors.emplace_back("t_samples must be at least 10");
  for (double mu : a.mu_list)
    if (!(mu > 0.0)) errors.emplace_back("mu_list entries must be positive");
  for (double xi : a.xi_list)
    if (!(xi > 0.0)) errors.emplace_back("xi_list entries must be positive");
}

}  // namespace detail

/// Parses and validates a configuration document. Throws ConfigError listing
/// every violation.
inline RunConfig parse_config(std::string_view text) {
  RunConfig c;
  std::vector<std::string> errors;
  std::map<std::string, int> seen;
  std::string section;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find_first_of("#;"); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back(where + "malformed section header");
        continue;
      }
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      static const std::vector<std::string> known{"run", "grid", "hermite", "system", "time", "initial_data", "analysis"};
      if (std::find(known.begin(), known.end(), section) == known.end())
        errors.push_back(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      errors.push_back(where + "expected key = value");
      continue;
    }
    const auto key = std::string(detail::trim(line.substr(0, eq)));
    const auto value = detail::trim(line.substr(eq + 1));
    const auto full = section + "." + key;
    if (seen[full]++) {
      errors.push_back(where + "duplicate key " + full);
      continue;
    }
    std::optional<std::string> err;
    if (full == "analysis.mu_list")
      err = detail::parse_list(value, c.analysis.mu_list);
    else if (full == "analysis.xi_list")
      err = detail::parse_list(value, c.analysis.xi_list);
    else if (const auto it = detail::setters().find(full); it != detail::setters().end())
      err = it->second(c, value);
    else
      err = section.empty() ? "key outside any section: " + key : "unknown key " + full;
    if (err) errors.push_back(where + full + ": " + *err);
  }
  detail::validate_ranges(c, errors);
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

/// Fully resolved configuration, defaults included.
inline nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["run"] = {{"experiment", to_string(c.experiment)}, {"output_dir", c.output_dir}, {"threads", c.threads}};
  j["grid"] = {{"space_dim", c.grid.dim}, {"points_per_axis", c.grid.points}, {"domain_length", c.grid.length}};
  j["hermite"] = {{"degree_cap", c.hermite.degree_cap},
                  {"velocity_dim", c.hermite.velocity_dim},
                  {"transverse_cap", c.hermite.transverse_cap}};
  j["system"] = {{"mu", c.system.mu}, {"c0", c.system.c0}, {"gamma", c.system.gamma}};
  j["time"] = {{"t_end", c.time.t_end}, {"dt", c.time.dt}, {"sample_every", c.time.sample_every}};
  j["initial_data"] = {
      {"generator", c.initial.generator}, {"amplitude", c.initial.amplitude}, {"seed", c.initial.seed}};
  const auto& a = c.analysis;
  j["analysis"] = {{"energy_order", a.energy_order}, {"r0", a.r0},           {"tau4", a.tau4},
                   {"tau5", a.tau5},                 {"q", a.q},             {"deriv_order", a.deriv_order},
                   {"t_min", a.t_min},               {"t_max", a.t_max},     {"t_samples", a.t_samples},
                   {"mu_list", a.mu_list},           {"xi_list", a.xi_list}};
  return j;
}

}  // namespace vfp
