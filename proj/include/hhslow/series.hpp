#pragma once

// Regular perturbation series in eps for the fast variables, the one-loop
// return time, and the degenerate (y0 = ydot0 = 0) expansions.
//
// The second-order terms carry secular factors t*f2(t), t*g2(t), so the
// truncation is only useful while t*eps^2 stays O(1).

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "error.hpp"
#include "integrate.hpp"
#include "model.hpp"
#include "section.hpp"

namespace hhslow {

struct SeriesIC {
  double x0 = 0.0;
  double y0 = 0.0;
  double xdot0 = 0.0;
  double ydot0 = 0.0;

  static SeriesIC from_state(const PhaseState& s) { return {s.x, s.y, s.xdot, s.ydot}; }
  PhaseState state() const { return {x0, y0, xdot0, ydot0, 0.0}; }
};

struct SeriesEval {
  double x = 0.0;
  double y = 0.0;
  double xdot = 0.0;
  double ydot = 0.0;
  int order = 0;

  double v() const noexcept { return y * y + ydot * ydot; }
  double w() const noexcept { return xdot * ydot + x * y; }
};

namespace detail {

template <typename T>
struct SeriesXY {
  T x;
  T y;
};

/// Truncated series at (possibly complex) time t.
template <typename T>
SeriesXY<T> series_terms(const SeriesIC& ic, double e, T t, int order) {
  using std::cos;
  using std::sin;
  const double x0 = ic.x0, y0 = ic.y0, a = ic.xdot0, b = ic.ydot0;
  const T c1 = cos(t), s1 = sin(t);
  SeriesXY<T> out{x0 * c1 + a * s1, y0 * c1 + b * s1};
  if (order == 0 || e == 0.0) return out;

  const T sh = sin(0.5 * t);
  const T s2h = sh * sh;
  const T xe = (-4.0 / 3.0) * s2h *
               ((x0 * b + y0 * a) * s1 + (x0 * y0 - a * b) * c1 + (2.0 * x0 * y0 + a * b));
  const T ye = (-2.0 / 3.0) * s2h *
               ((x0 * x0 - y0 * y0 - a * a + b * b) * c1 + 2.0 * (x0 * a - y0 * b) * s1 +
                (a * a - b * b + 2.0 * x0 * x0 - 2.0 * y0 * y0));
  out.x += e * xe;
  out.y += e * ye;
  if (order == 1) return out;

  const T c2 = cos(2.0 * t), c3 = cos(3.0 * t);
  const T s2 = sin(2.0 * t), s3 = sin(3.0 * t);
  const double x2 = x0 * x0, y2 = y0 * y0, a2 = a * a, b2 = b * b;

  const T f1 = (16.0 * c2 * (x0 * x2 + x0 * y2 + 4.0 * x0 * a2 + 4.0 * y0 * a * b) +
                29.0 * x0 * x2 * c1 + 3.0 * x0 * x2 * c3 - 48.0 * x0 * x2 +
                65.0 * x2 * a * s1 - 16.0 * x2 * a * s2 + 9.0 * x2 * a * s3 +
                29.0 * x0 * y2 * c1 + 3.0 * x0 * y2 * c3 - 48.0 * x0 * y2 +
                86.0 * x0 * y0 * b * s1 + 32.0 * x0 * y0 * b * s2 + 6.0 * x0 * y0 * b * s3 -
                55.0 * x0 * a2 * c1 - 9.0 * x0 * a2 * c3 - 189.0 * x0 * b2 * c1 -
                3.0 * x0 * b2 * c3 + 192.0 * x0 * b2 - 21.0 * y2 * a * s1 - 48.0 * y2 * a * s2 +
                3.0 * y2 * a * s3 + 134.0 * y0 * a * b * c1 - 6.0 * y0 * a * b * c3 +
                32.0 * a * b2 * s2 - 192.0 * y0 * a * b + 5.0 * a * a2 * s1 +
                32.0 * a * a2 * s2 - 3.0 * a * a2 * s3 + 5.0 * a * b2 * s1 - 3.0 * a * b2 * s3) /
               144.0;
  const T f2 = (60.0 * x0 * x2 * s1 - 60.0 * x2 * a * c1 + 60.0 * x0 * y2 * s1 -
                168.0 * x0 * y0 * b * c1 + 168.0 * y0 * a * b * s1 + 60.0 * x0 * a2 * s1 -
                108.0 * x0 * b2 * s1 + 108.0 * y2 * a * c1 - 60.0 * a * (a2 + b2) * c1) /
               144.0;
  const T g1 = (16.0 * c2 * (x2 * y0 + 4.0 * x0 * a * b + y0 * y2 + 4.0 * y0 * b2) +
                29.0 * x2 * y0 * c1 + 3.0 * x2 * y0 * c3 - 48.0 * x2 * y0 -
                21.0 * x2 * b * s1 - 48.0 * x2 * b * s2 + 3.0 * x2 * b * s3 +
                86.0 * x0 * y0 * a * s1 + 32.0 * b * b2 * s2 + 32.0 * x0 * y0 * a * s2 +
                6.0 * x0 * y0 * a * s3 + 134.0 * x0 * a * b * c1 - 6.0 * x0 * a * b * c3 -
                192.0 * x0 * a * b + 29.0 * y0 * y2 * c1 + 3.0 * y0 * y2 * c3 - 48.0 * y0 * y2 +
                65.0 * y2 * b * s1 - 16.0 * y2 * b * s2 + 9.0 * y2 * b * s3 -
                y0 * (189.0 * a2 + 55.0 * b2) * c1 - 3.0 * y0 * a2 * c3 + 192.0 * y0 * a2 -
                3.0 * b * b2 * s3 - 9.0 * y0 * b2 * c3 + 5.0 * a2 * b * s1 + 32.0 * a2 * b * s2 -
                3.0 * a2 * b * s3 + 5.0 * b * b2 * s1) /
               144.0;
  // The cos t coefficient 108 x0^2 ydot0 mirrors f2's 108 y0^2 xdot0.
  const T g2 = (60.0 * x2 * y0 * s1 + 108.0 * x2 * b * c1 - 168.0 * x0 * y0 * a * c1 +
                168.0 * x0 * a * b * s1 + 60.0 * y0 * y2 * s1 - 60.0 * y2 * b * c1 -
                108.0 * y0 * a2 * s1 + 60.0 * y0 * b2 * s1 - 60.0 * b * (a2 + b2) * c1) /
               144.0;
  out.x += e * e * (f1 + t * f2);
  out.y += e * e * (g1 + t * g2);
  return out;
}

inline constexpr double kComplexStep = 1e-30;

}  // namespace detail

/// Truncated series of order 0, 1 or 2 at time t. Velocities are exact
/// derivatives of the truncated series (complex-step differentiation).
inline SeriesEval perturbative_xy(const SeriesIC& ic, Epsilon eps, double t, int order) {
  if (order < 0 || order > 2) {
    throw ValidationError("invalid_order", "series order must be 0, 1 or 2");
  }
  const double e = eps.value();
  auto re = detail::series_terms<double>(ic, e, t, order);
  if (t == 0.0) {
    // Every correction vanishes at t = 0; avoid rounding residue.
    re = {ic.x0, ic.y0};
  }
  const auto cx = detail::series_terms<std::complex<double>>(
      ic, e, std::complex<double>(t, detail::kComplexStep), order);
  return {re.x, re.y, cx.x.imag() / detail::kComplexStep, cx.y.imag() / detail::kComplexStep,
          order};
}

/// Return time to y = y0 after one fast loop, to O(eps^2).
inline double loop_time(const SeriesIC& ic, Epsilon eps) {
  if (ic.ydot0 == 0.0) {
    throw ValidationError("degenerate_loop", "loop time requires ydot0 != 0");
  }
  const double x0 = ic.x0, y0 = ic.y0, a = ic.xdot0, b = ic.ydot0, e = eps.value();
  const double num = 14.0 * x0 * y0 * a - 9.0 * x0 * x0 * b + 5.0 * y0 * y0 * b +
                     5.0 * a * a * b + 5.0 * b * b * b;
  return 2.0 * std::numbers::pi + e * e * std::numbers::pi * num / (6.0 * b);
}

struct DegenerateEval {
  double x = 0.0;
  double y = 0.0;
  double v = 0.0;
  double w = 0.0;
};

/// Initial state for the degenerate expansions: x0 = sqrt(2h), all else zero.
inline PhaseState degenerate_initial_state(double h) {
  if (!(h > 0.0)) throw ValidationError("invalid_energy", "degenerate case needs h > 0");
  return {std::sqrt(2.0 * h), 0.0, 0.0, 0.0, 0.0};
}

/// Expansions for y0 = ydot0 = xdot0 = 0. x and y carry secular terms at
/// eps^2 and eps^3; v and w only at eps^4 and eps^3. Valid for |t| eps^2 <= 1.
inline DegenerateEval degenerate_series(double h, Epsilon eps, double t) {
  if (!(h > 0.0)) throw ValidationError("invalid_energy", "degenerate case needs h > 0");
  const double e = eps.value();
  if (std::abs(t) * e * e > 1.0) {
    throw ValidationError("outside_validity", "degenerate series requires |t| eps^2 <= 1");
  }
  const double c = std::cos(t), s = std::sin(t);
  const double c2 = c * c, c3 = c2 * c, c4 = c3 * c, c5 = c4 * c;
  const double sq2 = std::numbers::sqrt2;
  const double h32 = h * std::sqrt(h), h52 = h32 * h;
  DegenerateEval out;
  out.x = sq2 * std::sqrt(h) * c +
          e * e * (3.0 * c3 + 8.0 * c2 + 15.0 * s * t + 5.0 * c - 16.0) * sq2 * h32 / 18.0;
  out.y = 2.0 * e * h * (c2 + c - 2.0) / 3.0 +
          e * e * e *
              ((150.0 * c + 75.0) * s * t + 2.0 * c4 + 15.0 * c3 + 318.0 * c2 - 239.0 * c - 96.0) *
              h * h / 135.0;
  out.v = -4.0 * (3.0 * c4 + 2.0 * c3 - 5.0) * h * h * e * e / 9.0;
  out.w = -2.0 * (c3 - 1.0) * sq2 * h32 * e / 3.0 +
          (-68.0 - 27.0 * c5 - 60.0 * c4 - 5.0 * c3 + (-75.0 * s * t + 80.0) * c2 + 80.0 * c) *
              sq2 * h52 * e * e * e / 45.0;
  return out;
}

struct ScalingRow {
  double eps = 0.0;
  std::int64_t n_max = 0;
  double w_ratio = 0.0;     ///< max_n |w_n| / (n eps^3)
  double u_ratio = 0.0;     ///< max_n |u_n - u_0| / (n eps^4) in (i), / (n eps^3) in (ii)
  double u_ratio_e3 = 0.0;  ///< max_n |u_n - u_0| / (n eps^3)
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  /// Largest ratio between consecutive rows, for each normalized quantity.
  double w_spread = 0.0;
  double u_spread = 0.0;
  bool bounded = false;
};

namespace detail {

inline ScalingRow scaling_row(std::span<const SlowPoint> pts, double eps, double u_power) {
  ScalingRow row;
  row.eps = eps;
  row.n_max = pts.back().n;
  const double u0 = pts.front().u;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const auto n = static_cast<double>(pts[i].n);
    const double du = std::abs(pts[i].u - u0);
    row.w_ratio = std::max(row.w_ratio, std::abs(pts[i].w) / (n * eps * eps * eps));
    row.u_ratio = std::max(row.u_ratio, du / (n * std::pow(eps, u_power)));
    row.u_ratio_e3 = std::max(row.u_ratio_e3, du / (n * eps * eps * eps));
  }
  return row;
}

inline double spread(double a, double b) {
  if (a == 0.0 && b == 0.0) return 1.0;
  if (a == 0.0 || b == 0.0) return INFINITY;
  return std::max(a / b, b / a);
}

inline ScalingReport finish_report(std::vector<ScalingRow> rows, double max_spread) {
  ScalingReport rep;
  rep.rows = std::move(rows);
  rep.w_spread = 1.0;
  rep.u_spread = 1.0;
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    rep.w_spread = std::max(rep.w_spread, spread(rep.rows[i].w_ratio, rep.rows[i - 1].w_ratio));
    rep.u_spread = std::max(rep.u_spread, spread(rep.rows[i].u_ratio, rep.rows[i - 1].u_ratio));
  }
  rep.bounded = rep.w_spread <= max_spread && rep.u_spread <= max_spread;
  for (const auto& r : rep.rows) {
    rep.bounded = rep.bounded && std::isfinite(r.w_ratio) && std::isfinite(r.u_ratio);
  }
  return rep;
}

inline std::int64_t count_at_fixed_k(double k, double eps) {
  if (!(eps > 0.0)) throw ValidationError("invalid_epsilon", "scaling runs need eps > 0");
  return std::max<std::int64_t>(1, std::llround(k / (eps * eps * eps)));
}

}  // namespace detail

/// Degenerate start (y0 = ydot0 = 0, x0 = sqrt(2h)). For each eps runs
/// n <= k / eps^3 loops, sampling the per-loop maximum of y near the
/// section, and normalizes w_n by n eps^3 and u_n - u_0 by n eps^4.
inline ScalingReport verify_theorem_i_scaling(double h, std::span<const double> eps_list,
                                              double k, const IntegratorConfig& cfg,
                                              double max_spread = 3.0) {
  std::vector<ScalingRow> rows;
  for (double e : eps_list) {
    const Epsilon eps(e);
    const auto pts = iterate_degenerate(degenerate_initial_state(h), eps,
                                        detail::count_at_fixed_k(k, e), cfg);
    rows.push_back(detail::scaling_row(pts, e, 4.0));
  }
  return detail::finish_report(std::move(rows), max_spread);
}

/// Start with u0 = w0 = 0: x0 = ydot0 = sqrt(h), y0 = xdot0 = 0. Both
/// u_n and w_n are normalized by n eps^3.
inline ScalingReport verify_theorem_ii_scaling(double h, std::span<const double> eps_list,
                                               double k, const IntegratorConfig& cfg,
                                               double max_spread = 3.0) {
  if (!(h > 0.0)) throw ValidationError("invalid_energy", "scaling run needs h > 0");
  std::vector<ScalingRow> rows;
  const PhaseState s0{std::sqrt(h), 0.0, 0.0, std::sqrt(h), 0.0};
  for (double e : eps_list) {
    const Epsilon eps(e);
    const auto pts = iterate_poincare(s0, eps, detail::count_at_fixed_k(k, e), cfg);
    rows.push_back(detail::scaling_row(pts, e, 3.0));
  }
  return detail::finish_report(std::move(rows), max_spread);
}

}  // namespace hhslow
