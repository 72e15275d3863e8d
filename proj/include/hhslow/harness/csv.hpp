#pragma once

// CSV rendering of run artifacts. Slow points use 17 significant digits;
// other tables use the shortest round-trip form.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "../error.hpp"
#include "../integrate.hpp"
#include "../predictor.hpp"
#include "../section.hpp"
#include "config.hpp"

namespace hhslow::harness {

inline std::string format_17g(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string slow_points_csv(std::span<const SlowPoint> pts) {
  std::string s = "n,t,v,w,u,h_resid\n";
  s.reserve(pts.size() * 120);
  for (const auto& p : pts) {
    s += std::to_string(p.n);
    for (double x : {p.t, p.v, p.w, p.u, p.h_resid}) {
      s += ',';
      s += format_17g(x);
    }
    s += '\n';
  }
  return s;
}

inline std::string predictions_csv(std::span<const SlowPair> pred, PredictorMode mode) {
  std::string s = "n,u_pred,w_pred,mode\n";
  s.reserve(pred.size() * 60);
  const std::string m(to_string(mode));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    s += std::to_string(i) + ',' + format_double(pred[i].u) + ',' + format_double(pred[i].w) +
         ',' + m + '\n';
  }
  return s;
}

inline std::string trajectory_csv(std::span<const PhaseState> samples, double h0) {
  std::string s = "t,x,y,xdot,ydot,v,w\n";
  s.reserve(samples.size() * 140);
  for (const auto& p : samples) {
    const auto sv = slow_variables(p, h0);
    bool first = true;
    for (double x : {p.t, p.x, p.y, p.xdot, p.ydot, sv.v, sv.w}) {
      if (!first) s += ',';
      s += format_double(x);
      first = false;
    }
    s += '\n';
  }
  return s;
}

/// Minimal reader for numeric CSV tables with a header row. Non-numeric
/// cells (such as a mode column) are read as NaN.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw ValidationError("unknown_column", "CSV has no column '" + std::string(name) + "'");
  }
  std::vector<double> values(std::string_view name) const {
    const auto c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(c < r.size() ? r[c] : NAN);
    return out;
  }
};

inline CsvTable parse_csv(std::string_view text) {
  CsvTable t;
  bool header = true;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    auto line = detail::trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    if (line.empty()) continue;
    const auto cells = detail::split_list(line);
    if (header) {
      for (auto c : cells) t.header.emplace_back(c);
      header = false;
      continue;
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (auto c : cells) {
      double v = NAN;
      const auto res = std::from_chars(c.data(), c.data() + c.size(), v);
      if (res.ec != std::errc{} || res.ptr != c.data() + c.size()) v = NAN;
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw ValidationError("empty_csv", "CSV input has no header row");
  return t;
}

}  // namespace hhslow::harness
