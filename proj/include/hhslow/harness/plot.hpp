#pragma once

// Standalone SVG line charts: axes, ticks, labels, legend, any number of
// overlaid series. Long series are decimated to a min/max envelope per
// pixel column so the file stays small.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "../error.hpp"
#include "csv.hpp"

namespace hhslow::harness {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color;  ///< empty: taken from the default palette
};

struct PlotStyle {
  std::string title;
  std::string x_label = "n";
  std::string y_label;
  bool log_y = false;
  int width = 800;
  int height = 480;
};

namespace detail {

// First series blue, second red.
inline constexpr const char* kPalette[] = {"#1f4fbf", "#d62728", "#2ca02c", "#9467bd",
                                           "#ff7f0e", "#17becf"};

inline std::string fmt(double x, const char* spec = "%.6g") {
  char buf[40];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

inline std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

/// About `target` round-valued ticks covering [lo, hi].
inline std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
  const double span = hi - lo;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (span / step <= target) break;
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step) {
    ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  }
  return ticks;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!(lo < hi)) {
      const double d = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
      lo -= d;
      hi += d;
    }
  }
};

}  // namespace detail

inline std::string render_svg(std::span<const PlotSeries> series, const PlotStyle& style) {
  using detail::fmt;
  if (series.empty()) throw ValidationError("empty_plot", "plot needs at least one series");
  bool any = false;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) {
      throw ValidationError("invalid_plot", "series '" + s.label + "' has mismatched x and y");
    }
    any = any || !s.x.empty();
  }
  if (!any) throw ValidationError("empty_plot", "all plot series are empty");

  const auto ty = [&](double v) {
    return style.log_y ? (v > 0.0 ? std::log10(v) : std::numeric_limits<double>::quiet_NaN()) : v;
  };
  detail::Range xr, yr;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      xr.add(s.x[i]);
      yr.add(ty(s.y[i]));
    }
  }
  if (!std::isfinite(xr.lo) || !std::isfinite(yr.lo)) {
    throw ValidationError("empty_plot", "no finite points to plot");
  }
  xr.pad();
  yr.pad();
  const double ypad = 0.04 * (yr.hi - yr.lo);
  yr.lo -= ypad;
  yr.hi += ypad;

  const double W = style.width, H = style.height;
  const double ml = 80, mr = 20, mt = 40, mb = 56;
  const double pw = W - ml - mr, ph = H - mt - mb;
  const auto px = [&](double x) { return ml + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  const auto py = [&](double y) { return mt + (1.0 - (y - yr.lo) / (yr.hi - yr.lo)) * ph; };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(W) + "\" height=\"" + fmt(H) +
         "\" viewBox=\"0 0 " + fmt(W) + " " + fmt(H) + "\" font-family=\"sans-serif\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<rect x=\"" + fmt(ml) + "\" y=\"" + fmt(mt) + "\" width=\"" + fmt(pw) + "\" height=\"" +
         fmt(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double t : detail::nice_ticks(xr.lo, xr.hi)) {
    const double X = px(t);
    svg += "<line x1=\"" + fmt(X) + "\" y1=\"" + fmt(mt + ph) + "\" x2=\"" + fmt(X) + "\" y2=\"" +
           fmt(mt + ph + 5) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt(X) + "\" y=\"" + fmt(mt + ph + 20) +
           "\" font-size=\"12\" text-anchor=\"middle\">" + fmt(t, "%.4g") + "</text>\n";
  }
  for (double t : detail::nice_ticks(yr.lo, yr.hi)) {
    const double Y = py(t);
    const std::string label = style.log_y ? "1e" + fmt(t, "%.3g") : fmt(t, "%.4g");
    svg += "<line x1=\"" + fmt(ml - 5) + "\" y1=\"" + fmt(Y) + "\" x2=\"" + fmt(ml) + "\" y2=\"" +
           fmt(Y) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt(ml - 8) + "\" y=\"" + fmt(Y + 4) +
           "\" font-size=\"12\" text-anchor=\"end\">" + label + "</text>\n";
  }
  svg += "<text x=\"" + fmt(ml + pw / 2) + "\" y=\"" + fmt(H - 12) +
         "\" font-size=\"14\" text-anchor=\"middle\">" + detail::escape_xml(style.x_label) +
         "</text>\n";
  svg += "<text x=\"18\" y=\"" + fmt(mt + ph / 2) + "\" font-size=\"14\" text-anchor=\"middle\" " +
         "transform=\"rotate(-90 18 " + fmt(mt + ph / 2) + ")\">" +
         detail::escape_xml(style.y_label) + "</text>\n";
  if (!style.title.empty()) {
    svg += "<text x=\"" + fmt(W / 2) + "\" y=\"24\" font-size=\"16\" text-anchor=\"middle\">" +
           detail::escape_xml(style.title) + "</text>\n";
  }

  const int columns = static_cast<int>(pw);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const std::string color =
        s.color.empty() ? detail::kPalette[k % std::size(detail::kPalette)] : s.color;
    std::string pts;
    const auto emit = [&](double x, double y) {
      if (!std::isfinite(y)) return;
      pts += fmt(px(x), "%.2f") + "," + fmt(py(y), "%.2f") + " ";
    };
    if (static_cast<int>(s.x.size()) <= 4 * columns) {
      for (std::size_t i = 0; i < s.x.size(); ++i) emit(s.x[i], ty(s.y[i]));
    } else {
      // Envelope: first, min, max and last point of every pixel column.
      std::size_t i = 0;
      while (i < s.x.size()) {
        const int col = static_cast<int>((px(s.x[i]) - ml));
        std::size_t j = i;
        std::size_t imin = i, imax = i;
        while (j < s.x.size() && static_cast<int>(px(s.x[j]) - ml) == col) {
          if (ty(s.y[j]) < ty(s.y[imin])) imin = j;
          if (ty(s.y[j]) > ty(s.y[imax])) imax = j;
          ++j;
        }
        std::vector<std::size_t> idx{i, imin, imax, j - 1};
        std::sort(idx.begin(), idx.end());
        idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
        for (auto q : idx) emit(s.x[q], ty(s.y[q]));
        i = j;
      }
    }
    svg += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.2\" points=\"" + pts +
           "\"/>\n";
    const double ly = mt + 16 + 18 * static_cast<double>(k);
    svg += "<line x1=\"" + fmt(ml + pw - 150) + "\" y1=\"" + fmt(ly) + "\" x2=\"" +
           fmt(ml + pw - 125) + "\" y2=\"" + fmt(ly) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + fmt(ml + pw - 118) + "\" y=\"" + fmt(ly + 4) + "\" font-size=\"12\">" +
           detail::escape_xml(s.label) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

inline void emit_plot(std::span<const PlotSeries> series, const PlotStyle& style,
                      const std::filesystem::path& path) {
  write_text_file(path, render_svg(series, style));
}

}  // namespace hhslow::harness
