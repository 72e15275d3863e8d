#pragma once

// Experiment configuration as flat "section.key = value" text.
//
//   # comment
//   [initial]          <- optional header; prefixes following keys
//   x0 = 0.3872983346207417
//   model.eps = 0.01   <- dotted keys work anywhere
//
// Lists are comma separated. serialize_config writes every key in dotted
// form with shortest round-trip numbers, so parse(serialize(c)) == c.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "../error.hpp"
#include "../integrate.hpp"
#include "../model.hpp"
#include "../predictor.hpp"

namespace hhslow::harness {

struct ExperimentConfig {
  std::string name = "experiment";
  PhaseState initial{};
  double eps = 0.1;
  /// Number of crossings; ignored when t_end > 0.
  std::int64_t crossings = 1000;
  double t_end = 0.0;
  std::int64_t sample_every = 1;
  IntegratorConfig integrator{};
  std::vector<PredictorMode> modes{PredictorMode::P1, PredictorMode::P2, PredictorMode::P3};
  double horizon_c = 0.5;
  std::string out_dir = "out";
  bool plot = false;
  std::uint64_t seed = 0;
  /// Member values for `sweep`; empty means a single run at `eps`.
  std::vector<double> sweep_eps{};
  int contour_nodes = 4096;
  std::vector<double> contour_eps{0.02, 0.01, 0.005};
  std::vector<double> series_eps{0.2, 0.1, 0.05};
  double series_t = 1.0;
  int series_order = 2;

  void validate() const;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Shortest decimal string that parses back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(std::string_view key, std::string_view text) {
  double v = 0.0;
  const auto t = trim(text);
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
    throw ValidationError("invalid_config", "key '" + std::string(key) + "': '" +
                                                std::string(t) + "' is not a number");
  }
  return v;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view text) {
  Int v = 0;
  const auto t = trim(text);
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
    throw ValidationError("invalid_config", "key '" + std::string(key) + "': '" +
                                                std::string(t) + "' is not an integer");
  }
  return v;
}

inline bool parse_bool(std::string_view key, std::string_view text) {
  const auto t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ValidationError("invalid_config",
                        "key '" + std::string(key) + "': expected true or false");
}

inline std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> out;
  const auto t = trim(text);
  if (t.empty()) return out;
  std::size_t pos = 0;
  for (;;) {
    const auto comma = t.find(',', pos);
    out.push_back(trim(t.substr(pos, comma == std::string_view::npos ? comma : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

inline std::vector<double> parse_doubles(std::string_view key, std::string_view text) {
  std::vector<double> out;
  for (auto item : split_list(text)) out.push_back(parse_double(key, item));
  return out;
}

inline std::string join_doubles(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ", ";
    s += format_double(xs[i]);
  }
  return s;
}

inline std::string join_modes(const std::vector<PredictorMode>& ms) {
  std::string s;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    if (i) s += ", ";
    s += to_string(ms[i]);
  }
  return s;
}

}  // namespace detail

inline void ExperimentConfig::validate() const {
  if (name.empty()) throw ValidationError("invalid_config", "run.name must not be empty");
  if (!initial.finite()) throw ValidationError("invalid_config", "initial state must be finite");
  (void)Epsilon(eps);
  for (double e : sweep_eps) (void)Epsilon(e);
  for (double e : contour_eps) (void)Epsilon(e);
  for (double e : series_eps) (void)Epsilon(e);
  if (crossings < 0) throw ValidationError("invalid_config", "run.crossings must be >= 0");
  if (t_end < 0.0) throw ValidationError("invalid_config", "run.t_end must be >= 0");
  if (sample_every < 1) throw ValidationError("invalid_config", "run.sample_every must be >= 1");
  integrator.validate();
  if (!(horizon_c > 0.0)) throw ValidationError("invalid_config", "predictor.horizon_c must be > 0");
  if (contour_nodes < 16) throw ValidationError("invalid_config", "contour.nodes must be >= 16");
  if (series_order < 0 || series_order > 2) {
    throw ValidationError("invalid_config", "series.order must be 0, 1 or 2");
  }
}

/// Applies one dotted key. Unknown keys are rejected.
inline void apply_config_key(ExperimentConfig& c, std::string_view key, std::string_view value) {
  using namespace detail;
  const auto v = trim(value);
  if (key == "run.name") c.name = std::string(v);
  else if (key == "run.crossings") c.crossings = parse_int<std::int64_t>(key, v);
  else if (key == "run.t_end") c.t_end = parse_double(key, v);
  else if (key == "run.sample_every") c.sample_every = parse_int<std::int64_t>(key, v);
  else if (key == "run.seed") c.seed = parse_int<std::uint64_t>(key, v);
  else if (key == "initial.x0") c.initial.x = parse_double(key, v);
  else if (key == "initial.y0") c.initial.y = parse_double(key, v);
  else if (key == "initial.xdot0") c.initial.xdot = parse_double(key, v);
  else if (key == "initial.ydot0") c.initial.ydot = parse_double(key, v);
  else if (key == "model.eps") c.eps = parse_double(key, v);
  else if (key == "integrator.method") c.integrator.method = parse_method(v);
  else if (key == "integrator.step_size") c.integrator.step_size = parse_double(key, v);
  else if (key == "integrator.drift_tolerance") c.integrator.drift_tolerance = parse_double(key, v);
  else if (key == "predictor.modes") {
    c.modes.clear();
    for (auto m : split_list(v)) c.modes.push_back(parse_mode(m));
  } else if (key == "predictor.horizon_c") c.horizon_c = parse_double(key, v);
  else if (key == "output.dir") c.out_dir = std::string(v);
  else if (key == "output.plot") c.plot = parse_bool(key, v);
  else if (key == "sweep.eps") c.sweep_eps = parse_doubles(key, v);
  else if (key == "contour.nodes") c.contour_nodes = parse_int<int>(key, v);
  else if (key == "contour.eps") c.contour_eps = parse_doubles(key, v);
  else if (key == "series.eps") c.series_eps = parse_doubles(key, v);
  else if (key == "series.t") c.series_t = parse_double(key, v);
  else if (key == "series.order") c.series_order = parse_int<int>(key, v);
  else throw ValidationError("invalid_config", "unknown key '" + std::string(key) + "'");
}

inline ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig c;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    auto line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (const auto hash = line.find_first_of("#;"); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ValidationError("invalid_config", "line " + show(line_no) + ": unterminated section");
      }
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("invalid_config", "line " + show(line_no) + ": expected key = value");
    }
    std::string key(detail::trim(line.substr(0, eq)));
    if (key.find('.') == std::string::npos && !section.empty()) key = section + "." + key;
    apply_config_key(c, key, line.substr(eq + 1));
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

inline std::string serialize_config(const ExperimentConfig& c) {
  using detail::join_doubles;
  std::ostringstream out;
  out << "run.name = " << c.name << '\n'
      << "run.crossings = " << c.crossings << '\n'
      << "run.t_end = " << format_double(c.t_end) << '\n'
      << "run.sample_every = " << c.sample_every << '\n'
      << "run.seed = " << c.seed << '\n'
      << "initial.x0 = " << format_double(c.initial.x) << '\n'
      << "initial.y0 = " << format_double(c.initial.y) << '\n'
      << "initial.xdot0 = " << format_double(c.initial.xdot) << '\n'
      << "initial.ydot0 = " << format_double(c.initial.ydot) << '\n'
      << "model.eps = " << format_double(c.eps) << '\n'
      << "integrator.method = " << to_string(c.integrator.method) << '\n'
      << "integrator.step_size = " << format_double(c.integrator.step_size) << '\n'
      << "integrator.drift_tolerance = " << format_double(c.integrator.drift_tolerance) << '\n'
      << "predictor.modes = " << detail::join_modes(c.modes) << '\n'
      << "predictor.horizon_c = " << format_double(c.horizon_c) << '\n'
      << "output.dir = " << c.out_dir << '\n'
      << "output.plot = " << (c.plot ? "true" : "false") << '\n'
      << "sweep.eps = " << join_doubles(c.sweep_eps) << '\n'
      << "contour.nodes = " << c.contour_nodes << '\n'
      << "contour.eps = " << join_doubles(c.contour_eps) << '\n'
      << "series.eps = " << join_doubles(c.series_eps) << '\n'
      << "series.t = " << format_double(c.series_t) << '\n'
      << "series.order = " << c.series_order << '\n';
  return out.str();
}

}  // namespace hhslow::harness
