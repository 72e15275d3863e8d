#pragma once

// One fast loop as a closed path in the complex y plane.
//
// With y as the independent variable the slow pair obeys
//
//   dv/dy = eps F,  dw/dy = eps G,  dt/dy = 1 / sqrt(v - y^2),
//   F = 2 (y^2 - x^2),  G = -[(x^2 - y^2) xdot / sqrt(v - y^2) + 2 x y],
//
// where x(y, v, w) solves the energy relation:
//
//   x    = (w y + sqrt(v - y^2) sqrt(S)) / (v + 2 eps y (v - y^2)),
//   S    = (2 h v - v^2 - w^2)(1 + 2 eps y) + (4/3) eps^2 y^4 (v - y^2)
//          - 4 eps (h - 2 v / 3) y^3,
//   xdot = (w - x y) / sqrt(v - y^2).
//
// The real loop between the turning points +-sqrt(v) is replaced by the
// contour C(v0): a counterclockwise circle of radius sqrt(v0) about +sqrt(v0),
// then one about -sqrt(v0), both through y = 0. Square roots are continued
// node to node along the path instead of taking principal values.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "model.hpp"
#include "stats.hpp"

namespace hhslow {

using cplx = std::complex<double>;

class BranchJumpError : public NumericQualityError {
 public:
  explicit BranchJumpError(const std::string& what) : NumericQualityError("branch_jump", what) {}
};

class ContourDegeneracyError : public NumericQualityError {
 public:
  ContourDegeneracyError(std::int64_t node, const std::string& what)
      : NumericQualityError("contour_degeneracy", what), node_(node) {}
  std::int64_t node() const noexcept { return node_; }

 private:
  std::int64_t node_;
};

/// Equal-angle discretization of C(v0).
class Contour {
 public:
  static constexpr int kDefaultNodes = 4096;

  explicit Contour(double v0, int nodes_per_circle = kDefaultNodes)
      : v0_(v0), nodes_(nodes_per_circle) {
    if (!(v0 > 0.0) || !std::isfinite(v0)) {
      throw ValidationError("invalid_contour", "contour radius needs v0 > 0");
    }
    if (nodes_per_circle < 16) {
      throw ValidationError("invalid_contour", "at least 16 nodes per circle are required");
    }
  }

  double v0() const noexcept { return v0_; }
  double radius() const noexcept { return std::sqrt(v0_); }
  int nodes_per_circle() const noexcept { return nodes_; }
  double step() const noexcept { return 2.0 * std::numbers::pi / nodes_; }

  /// Circle 0 is centered at +sqrt(v0) and starts at angle pi; circle 1 is
  /// centered at -sqrt(v0) and starts at angle 0. Both start at y = 0.
  double center(int circle) const noexcept { return circle == 0 ? radius() : -radius(); }
  double start_angle(int circle) const noexcept { return circle == 0 ? std::numbers::pi : 0.0; }

  cplx point(int circle, double theta) const noexcept {
    return center(circle) + radius() * std::polar(1.0, theta);
  }
  cplx tangent(int /*circle*/, double theta) const noexcept {
    return cplx(0.0, 1.0) * radius() * std::polar(1.0, theta);
  }

  /// All 2 * nodes_per_circle + 1 nodes, starting and ending at y = 0.
  std::vector<cplx> nodes() const {
    std::vector<cplx> out;
    out.reserve(2 * static_cast<std::size_t>(nodes_) + 1);
    for (int c = 0; c < 2; ++c) {
      for (int k = 0; k < nodes_; ++k) out.push_back(point(c, start_angle(c) + k * step()));
    }
    out.push_back(0.0);
    return out;
  }

 private:
  double v0_;
  int nodes_;
};

/// Continued square-root branches at a point of the path.
struct Branch {
  cplx sqrt_q;  ///< sqrt(v - y^2)
  cplx sqrt_s;  ///< sqrt(S)
};

struct ContourState {
  cplx y;
  cplx v;
  cplx w;
  cplx t;
  Branch branch;
  double arg_q = 0.0;  ///< continuous argument of v - y^2
  double arg_s = 0.0;  ///< continuous argument of S
};

struct XEval {
  cplx x;
  cplx xdot;
};

namespace detail {

inline cplx contour_s(cplx y, cplx v, cplx w, double h, double e) {
  const cplx q = v - y * y;
  const cplx y3 = y * y * y;
  return (2.0 * h * v - v * v - w * w) * (1.0 + 2.0 * e * y) +
         (4.0 / 3.0) * e * e * y3 * y * q - 4.0 * e * (h - 2.0 * v / 3.0) * y3;
}

/// The root of z closer to `ref`.
inline cplx continue_sqrt(cplx z, cplx ref) {
  const cplx r = std::sqrt(z);
  return std::abs(r - ref) <= std::abs(-r - ref) ? r : -r;
}

inline double wrap_pi(double a) {
  while (a > std::numbers::pi) a -= 2.0 * std::numbers::pi;
  while (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

inline constexpr double kDegeneracyScale = 1e-12;

}  // namespace detail

/// x and xdot at the state's y with its tracked branches.
inline XEval x_of_y(const ContourState& s, Epsilon eps, std::int64_t node = -1) {
  const double e = eps.value();
  const cplx q = s.v - s.y * s.y;
  const cplx den = s.v + 2.0 * e * s.y * q;
  const double scale = std::max(1.0, std::abs(s.v));
  if (std::abs(den) < detail::kDegeneracyScale * scale ||
      std::abs(s.branch.sqrt_q) < detail::kDegeneracyScale * std::sqrt(scale)) {
    throw ContourDegeneracyError(node, "vanishing denominator in x(y) at node " +
                                           show(node));
  }
  const cplx x = (s.w * s.y + s.branch.sqrt_q * s.branch.sqrt_s) / den;
  return {x, (s.w - x * s.y) / s.branch.sqrt_q};
}

struct ContourOptions {
  int nodes_per_circle = Contour::kDefaultNodes;
  /// Allowed |Im v1| + |Im w1| relative to |v1| + |w1|.
  double imag_tolerance = 1e-8;
  /// Sign of x at the start point; fixes the branch of sqrt(S).
  double x_sign = 1.0;
  /// Keep the state at every node in ContourResult::path.
  bool record_path = false;
};

struct ContourDiagnostics {
  std::int64_t nodes = 0;
  double winding_q = 0.0;     ///< accumulated argument of v - y^2 over the path
  double winding_s = 0.0;     ///< accumulated argument of S over the path
  double max_sqrt_step = 0.0; ///< largest node-to-node rotation of a continued root
  double imag_residual = 0.0; ///< (|Im v1| + |Im w1|) / (|v1| + |w1|)
  double imag_t = 0.0;        ///< |Im t1|
  bool sqrt_q_returned = false;
  double x_closure = 0.0;     ///< |x(end) - x_sign sqrt(2 h v1 - v1^2 - w1^2) / sqrt(v1)|
};

struct ContourResult {
  double v1 = 0.0;
  double w1 = 0.0;
  double t1 = 0.0;
  cplx v1c;
  cplx w1c;
  cplx t1c;
  ContourDiagnostics diagnostics;
  std::vector<ContourState> path;
};

namespace detail {

struct Slope3 {
  cplx v, w, t;
};

struct ContourRhs {
  double h;
  Epsilon eps;

  Slope3 operator()(cplx y, cplx dy, cplx v, cplx w, Branch& br, std::int64_t node) const {
    const double e = eps.value();
    br.sqrt_q = continue_sqrt(v - y * y, br.sqrt_q);
    br.sqrt_s = continue_sqrt(contour_s(y, v, w, h, e), br.sqrt_s);
    ContourState s{y, v, w, 0.0, br};
    const auto xe = x_of_y(s, eps, node);
    const cplx x2 = xe.x * xe.x, y2 = y * y;
    const cplx f = 2.0 * (y2 - x2);
    const cplx g = -((x2 - y2) * xe.xdot / br.sqrt_q + 2.0 * xe.x * y);
    return {dy * e * f, dy * e * g, dy / br.sqrt_q};
  }
};

}  // namespace detail

/// Integrates (v, w, t) once around `contour` from y = 0 with start values
/// (v_start, w_start, 0). The contour radius may differ from v_start.
inline ContourResult integrate_contour_on(const Contour& contour, double v_start, double w_start,
                                          double h, Epsilon eps, const ContourOptions& opts = {}) {
  const double r0sq = 2.0 * h * v_start - v_start * v_start - w_start * w_start;
  if (!(v_start > 0.0) || r0sq < 0.0) {
    throw DomainError("contour start (v, w) = (" + show(v_start) + ", " +
                      show(w_start) + ") has no real point on y = 0");
  }
  const double x_sign = opts.x_sign < 0.0 ? -1.0 : 1.0;
  const detail::ContourRhs rhs{h, eps};

  ContourState st;
  st.y = 0.0;
  st.v = v_start;
  st.w = w_start;
  st.t = 0.0;
  st.branch = {std::sqrt(v_start), x_sign * std::sqrt(r0sq)};
  ContourResult out;
  if (opts.record_path) {
    out.path.reserve(2 * static_cast<std::size_t>(contour.nodes_per_circle()) + 1);
    out.path.push_back(st);
  }

  ContourDiagnostics diag;
  const double hstep = contour.step();
  cplx prev_q = st.v - st.y * st.y;
  cplx prev_s = detail::contour_s(st.y, st.v, st.w, h, eps.value());
  std::int64_t node = 0;

  for (int c = 0; c < 2; ++c) {
    const double th0 = contour.start_angle(c);
    for (int k = 0; k < contour.nodes_per_circle(); ++k, ++node) {
      const double th = th0 + k * hstep;
      const double tm = th + 0.5 * hstep;
      const double te = th + hstep;
      Branch b = st.branch;
      const auto k1 = rhs(contour.point(c, th), contour.tangent(c, th), st.v, st.w, b, node);
      const Branch at_node = b;
      Branch b2 = at_node, b3 = at_node, b4 = at_node;
      const auto k2 = rhs(contour.point(c, tm), contour.tangent(c, tm), st.v + 0.5 * hstep * k1.v,
                          st.w + 0.5 * hstep * k1.w, b2, node);
      const auto k3 = rhs(contour.point(c, tm), contour.tangent(c, tm), st.v + 0.5 * hstep * k2.v,
                          st.w + 0.5 * hstep * k2.w, b3, node);
      const auto k4 = rhs(contour.point(c, te), contour.tangent(c, te), st.v + hstep * k3.v,
                          st.w + hstep * k3.w, b4, node);
      st.v += hstep / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
      st.w += hstep / 6.0 * (k1.w + 2.0 * k2.w + 2.0 * k3.w + k4.w);
      st.t += hstep / 6.0 * (k1.t + 2.0 * k2.t + 2.0 * k3.t + k4.t);
      st.y = k + 1 == contour.nodes_per_circle() ? cplx(0.0) : contour.point(c, te);

      // Continue the branches to the new node and track the windings.
      const cplx q = st.v - st.y * st.y;
      const cplx s = detail::contour_s(st.y, st.v, st.w, h, eps.value());
      const double dq = detail::wrap_pi(std::arg(q) - std::arg(prev_q));
      const double ds = detail::wrap_pi(std::arg(s) - std::arg(prev_s));
      st.arg_q += dq;
      st.arg_s += ds;
      prev_q = q;
      prev_s = s;
      const cplx new_q = detail::continue_sqrt(q, b4.sqrt_q);
      const cplx new_s = detail::continue_sqrt(s, b4.sqrt_s);
      const double rot_q = std::abs(std::arg(new_q / st.branch.sqrt_q));
      const double rot_s = std::abs(std::arg(new_s / st.branch.sqrt_s));
      diag.max_sqrt_step = std::max({diag.max_sqrt_step, rot_q, rot_s});
      if (rot_q >= std::numbers::pi / 4.0 || rot_s >= std::numbers::pi / 4.0) {
        throw BranchJumpError("square-root branch rotated by " +
                              show(std::max(rot_q, rot_s)) + " rad at node " +
                              show(node) + "; refine the contour");
      }
      st.branch = {new_q, new_s};
      if (opts.record_path) out.path.push_back(st);
    }
  }

  diag.nodes = node;
  diag.winding_q = st.arg_q;
  diag.winding_s = st.arg_s;
  // Back at y = 0 the continued root must be the positive root of v1 again.
  const cplx end_root = std::sqrt(st.v);
  diag.sqrt_q_returned = std::abs(st.branch.sqrt_q - end_root) < std::abs(st.branch.sqrt_q + end_root);
  const cplx r1sq = 2.0 * h * st.v - st.v * st.v - st.w * st.w;
  diag.x_closure = std::abs(x_of_y(st, eps, node).x - x_sign * std::sqrt(r1sq) / std::sqrt(st.v));
  const double mag = std::abs(st.v) + std::abs(st.w);
  diag.imag_residual = (std::abs(st.v.imag()) + std::abs(st.w.imag())) / (mag > 0.0 ? mag : 1.0);
  diag.imag_t = std::abs(st.t.imag());

  if (!(diag.imag_residual <= opts.imag_tolerance)) {
    throw NumericQualityError("imaginary_residual",
                              "loop values keep a relative imaginary part " +
                                  show(diag.imag_residual) + " above tolerance " +
                                  show(opts.imag_tolerance));
  }
  out.v1c = st.v;
  out.w1c = st.w;
  out.t1c = st.t;
  out.v1 = st.v.real();
  out.w1 = st.w.real();
  out.t1 = st.t.real();
  out.diagnostics = diag;
  return out;
}

/// One loop on C(v0) starting from (v0, w0).
inline ContourResult integrate_contour(double v0, double w0, double h, Epsilon eps,
                                       const ContourOptions& opts = {}) {
  if (!((h - v0) * (h - v0) + w0 * w0 < h * h)) {
    throw DomainError("contour requires (h - v0)^2 + w0^2 < h^2");
  }
  return integrate_contour_on(Contour(v0, opts.nodes_per_circle), v0, w0, h, eps, opts);
}

struct ContourLoop {
  std::int64_t n = 0;
  double v = 0.0;
  double w = 0.0;
  double t = 0.0;  ///< accumulated time
};

/// Repeats the loop map n times. The contour stays C(v0) unless `recenter`
/// is set, in which case each loop uses C(v_n).
inline std::vector<ContourLoop> iterate_contour(double v0, double w0, double h, Epsilon eps,
                                                std::int64_t loops,
                                                const ContourOptions& opts = {},
                                                bool recenter = false) {
  if (loops < 0) throw ValidationError("invalid_count", "loop count must be nonnegative");
  std::vector<ContourLoop> out;
  out.reserve(static_cast<std::size_t>(loops) + 1);
  out.push_back({0, v0, w0, 0.0});
  const Contour fixed(v0, opts.nodes_per_circle);
  for (std::int64_t n = 1; n <= loops; ++n) {
    const auto& last = out.back();
    const auto res = recenter ? integrate_contour_on(Contour(last.v, opts.nodes_per_circle),
                                                     last.v, last.w, h, eps, opts)
                              : integrate_contour_on(fixed, last.v, last.w, h, eps, opts);
    out.push_back({n, res.v1, res.w1, last.t + res.t1});
  }
  return out;
}

struct FirstOrderSlow {
  cplx v1;
  cplx w1;
};

/// Closed forms of the first-order terms v1(y), w1(y) with v1(0) = w1(0) = 0.
/// `sqrt_q` is the continued value of sqrt(v0 - y^2); `x_sign` selects the
/// sign of r0 = sqrt(2 h v0 - v0^2 - w0^2).
inline FirstOrderSlow first_order_slow(double v0, double w0, double h, cplx y, cplx sqrt_q,
                                       double x_sign = 1.0) {
  const double rr = 2.0 * h * v0 - v0 * v0 - w0 * w0;
  if (!(v0 > 0.0) || rr < 0.0) throw DomainError("first-order terms need v0 > 0 and r0 real");
  const cplx q = v0 - y * y;
  if (std::abs(sqrt_q * sqrt_q - q) > 1e-10 * std::max(1.0, std::abs(q))) {
    throw ValidationError("invalid_branch", "sqrt_q does not square to v0 - y^2");
  }
  const double r0 = std::copysign(std::sqrt(rr), x_sign);
  const double sv = std::sqrt(v0);
  const double v02 = v0 * v0, v03 = v02 * v0, w02 = w0 * w0;
  const cplx y2 = y * y, y3 = y2 * y;
  const cplx q32 = q * sqrt_q;

  const cplx v1 = (-2.0 / (3.0 * v02)) *
                  (-2.0 * w0 * q32 * r0 + 2.0 * v0 * sv * w0 * r0 - 2.0 * h * v0 * y3 +
                   6.0 * h * v02 * y - 3.0 * v0 * w02 * y - 3.0 * v03 * y + 2.0 * w02 * y3);
  const cplx w1 =
      (1.0 / (3.0 * v03)) *
      (6.0 * h * v0 * w0 * y3 - 6.0 * h * v02 * w0 * y - 4.0 * v02 * w0 * y3 -
       5.0 * v03 * sv * r0 + 3.0 * v03 * w0 * y - v0 * sv * w02 * r0 + 2.0 * h * v02 * sv * r0 +
       3.0 * v0 * w02 * w0 * y - 4.0 * w02 * w0 * y3 +
       sqrt_q * (-2.0 * v02 * y2 * r0 - 2.0 * h * v02 * r0 + 5.0 * v03 * r0 + v0 * w02 * r0 +
                 2.0 * h * v0 * y2 * r0 - 4.0 * w02 * y2 * r0));
  return {v1, w1};
}

struct LoopIncrement {
  double dv = 0.0;
  double dw = 0.0;
};

/// Leading one-loop increments eps^2 (14 pi/3) r0 (w0, h - v0).
inline LoopIncrement loop_one_leading(double v0, double w0, double h, Epsilon eps,
                                      double x_sign = 1.0) {
  const double rr = 2.0 * h * v0 - v0 * v0 - w0 * w0;
  if (rr < 0.0) throw DomainError("2 h v0 - v0^2 - w0^2 is negative");
  const double r0 = std::copysign(std::sqrt(rr), x_sign);
  const double e = eps.value();
  const double c = e * e * 14.0 * std::numbers::pi / 3.0 * r0;
  return {c * w0, c * (h - v0)};
}

struct IncrementRow {
  double eps = 0.0;
  double v1 = 0.0;
  double w1 = 0.0;
  double t1 = 0.0;
  double r_v = 0.0;
  double r_w = 0.0;
};

struct IncrementTable {
  std::vector<IncrementRow> rows;
  double slope_v = 0.0;
  double slope_w = 0.0;
};

/// Residuals after subtracting the leading increments, and their log-log
/// slopes in eps. Slopes are NaN when a residual vanishes identically.
inline IncrementTable one_loop_increment_check(double v0, double w0, double h,
                                               std::span<const double> eps_list,
                                               const ContourOptions& opts = {}) {
  IncrementTable tab;
  std::vector<double> es, rv, rw;
  for (double e : eps_list) {
    const Epsilon eps(e);
    const auto res = integrate_contour(v0, w0, h, eps, opts);
    const auto lead = loop_one_leading(v0, w0, h, eps, opts.x_sign);
    IncrementRow row{e, res.v1, res.w1, res.t1, res.v1 - v0 - lead.dv, res.w1 - w0 - lead.dw};
    tab.rows.push_back(row);
    es.push_back(e);
    rv.push_back(row.r_v);
    rw.push_back(row.r_w);
  }
  const auto fit = [&es](const std::vector<double>& r) {
    for (double x : r) {
      if (x == 0.0) return std::numeric_limits<double>::quiet_NaN();
    }
    return es.size() >= 2 ? loglog_slope(es, r) : std::numeric_limits<double>::quiet_NaN();
  };
  tab.slope_v = fit(rv);
  tab.slope_w = fit(rw);
  return tab;
}

}  // namespace hhslow
