#pragma once

// Section crossings on {y = 0} and the iterated Poincare map of the slow
// variables (u_n, w_n, v_n, t_n).
//
// Crossings are taken in one direction only, sign(ydot) == dir, fixed to
// sign(ydot_0) by iterate_poincare. That gives one crossing per fast loop.
// Crossings are located on the fixed integration grid and then landed
// exactly with y as the independent variable (Henon's trick):
//
//   dx/dy = xdot/ydot, dxdot/dy = xddot/ydot, dydot/dy = yddot/ydot, dt/dy = 1/ydot.
//
// The grid trajectory continues from the bracketing step, so landing error
// never feeds back into the propagation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "integrate.hpp"
#include "model.hpp"
#include "runge_kutta.hpp"
#include "stats.hpp"

namespace hhslow {

class CrossingDirection {
 public:
  constexpr CrossingDirection() = default;
  explicit CrossingDirection(int sign) : sign_(sign) {
    if (sign != 1 && sign != -1) {
      throw ValidationError("invalid_direction", "crossing direction must be +1 or -1");
    }
  }
  static CrossingDirection from_velocity(double ydot) {
    if (ydot == 0.0) {
      throw ValidationError("degenerate_direction",
                            "ydot0 = 0: no transversal crossing direction");
    }
    return CrossingDirection(ydot > 0.0 ? 1 : -1);
  }
  constexpr int sign() const noexcept { return sign_; }

 private:
  int sign_ = 1;
};

struct SlowPoint {
  std::int64_t n = 0;
  double t = 0.0;
  double v = 0.0;
  double w = 0.0;
  double u = 0.0;
  double h_resid = 0.0;
};

class LostOscillationError : public NumericQualityError {
 public:
  explicit LostOscillationError(const std::string& what)
      : NumericQualityError("lost_oscillation", what) {}
};

/// Tolerance for "already on the section": |y| <= kLandingTolerance * max(1, |ydot|).
inline constexpr double kLandingTolerance = 1e-13;

namespace detail {

inline constexpr int kLandingSubsteps = 2;

/// Integrates from `from` along y to y = 0 with RK6 in the independent variable y.
inline PhaseState land_on_y_zero(const PhaseState& from, Epsilon eps) {
  using V4 = Vec<double, 4>;  // x, xdot, ydot, t
  const auto f = [eps](double y, const V4& q) {
    const auto a = acceleration(q[0], y, eps);
    const double inv = 1.0 / q[2];
    return V4{{q[1] * inv, a.x * inv, a.y * inv, inv}};
  };
  V4 q{{from.x, from.xdot, from.ydot, from.t}};
  const double dy = -from.y / kLandingSubsteps;
  double y = from.y;
  for (int i = 0; i < kLandingSubsteps; ++i) {
    q = rk_step(kButcherRk6, f, y, q, dy);
    y += dy;
  }
  return {q[0], 0.0, q[1], q[2], q[3]};
}

/// Integrates from `from` along ydot to ydot = 0 (a local extremum of y).
inline PhaseState land_on_ydot_zero(const PhaseState& from, Epsilon eps) {
  using V4 = Vec<double, 4>;  // x, y, xdot, t
  // dy/dydot = ydot / yddot depends on the independent variable itself.
  const auto g = [eps](double ydot, const V4& q) {
    const auto a = acceleration(q[0], q[1], eps);
    const double inv = 1.0 / a.y;
    return V4{{q[2] * inv, ydot * inv, a.x * inv, inv}};
  };
  V4 q{{from.x, from.y, from.xdot, from.t}};
  const double dv = -from.ydot / kLandingSubsteps;
  double ydot = from.ydot;
  for (int i = 0; i < kLandingSubsteps; ++i) {
    q = rk_step(kButcherRk6, g, ydot, q, dv);
    ydot += dv;
  }
  return {q[0], q[1], q[2], 0.0, q[3]};
}

}  // namespace detail

/// Walks a trajectory crossing by crossing.
class SectionSampler {
 public:
  SectionSampler(const PhaseState& start, Epsilon eps, CrossingDirection dir,
                 const IntegratorConfig& cfg)
      : prop_(start, eps, cfg), dir_(dir) {}

  /// Next crossing of y = 0 with sign(ydot) == dir, strictly after the
  /// current time. Throws LostOscillationError if none occurs within 4*pi.
  PhaseState next() {
    const double s = dir_.sign();
    const double t_start = prop_.state().t;
    for (;;) {
      const PhaseState prev = prop_.state();
      const PhaseState& cur = prop_.advance();
      const double yp = s * prev.y;
      const double yc = s * cur.y;
      const bool at_start = prev.t == t_start && first_;
      const bool crossed = at_start ? (yp < 0.0 && yc >= 0.0) : (yp <= 0.0 && yc > 0.0);
      if (crossed && s * cur.ydot > 0.0) {
        first_ = false;
        PhaseState landed = prev.y == 0.0 ? prev : detail::land_on_y_zero(prev, prop_.eps());
        landed.y = 0.0;
        prop_.check_drift(landed);
        return landed;
      }
      if (cur.t - t_start > 4.0 * std::numbers::pi) {
        throw LostOscillationError("no crossing of y = 0 within 4*pi after t=" +
                                   show(t_start));
      }
      first_ = false;
    }
  }

  /// Next local maximum of y lying above `floor`. Used when y touches the
  /// section tangentially (ydot_0 = 0). Throws after `max_time` without one.
  PhaseState next_local_max_above(double floor, double max_time = 4.0 * std::numbers::pi) {
    const double t_start = prop_.state().t;
    for (;;) {
      const PhaseState prev = prop_.state();
      const PhaseState& cur = prop_.advance();
      if (prev.ydot > 0.0 && cur.ydot <= 0.0 && std::max(prev.y, cur.y) > floor) {
        PhaseState landed = detail::land_on_ydot_zero(prev, prop_.eps());
        prop_.check_drift(landed);
        return landed;
      }
      if (cur.t - t_start > max_time) {
        throw LostOscillationError("no local maximum of y above " + show(floor) +
                                   " within " + show(max_time) + " after t=" +
                                   show(t_start));
      }
    }
  }

  const Propagator& propagator() const noexcept { return prop_; }

 private:
  Propagator prop_;
  CrossingDirection dir_;
  bool first_ = true;
};

inline PhaseState next_crossing(const PhaseState& state, Epsilon eps, CrossingDirection dir,
                                const IntegratorConfig& cfg) {
  SectionSampler sampler(state, eps, dir, cfg);
  return sampler.next();
}

inline SlowPoint make_slow_point(std::int64_t n, const PhaseState& s, double h0, Epsilon eps) {
  const auto sv = slow_variables(s, h0);
  return {n, s.t, sv.v, sv.w, sv.u, std::abs(hamiltonian(s, eps) - h0)};
}

namespace detail {

inline void require_on_section(const PhaseState& s) {
  if (std::abs(s.y) > kLandingTolerance * std::max(1.0, std::abs(s.ydot))) {
    throw ValidationError("not_on_section", "initial state must satisfy y = 0");
  }
}

}  // namespace detail

/// Streams SlowPoints n = 0..N to `sink`. `state0` must lie on y = 0 with ydot != 0.
inline void for_each_crossing(const PhaseState& state0, Epsilon eps, std::int64_t N,
                              const IntegratorConfig& cfg,
                              const std::function<void(const SlowPoint&)>& sink) {
  detail::require_on_section(state0);
  if (N < 0) throw ValidationError("invalid_count", "crossing count must be nonnegative");
  const auto dir = CrossingDirection::from_velocity(state0.ydot);
  const double h0 = hamiltonian(state0, eps);
  sink(make_slow_point(0, state0, h0, eps));
  if (N == 0) return;
  SectionSampler sampler(state0, eps, dir, cfg);
  for (std::int64_t n = 1; n <= N; ++n) {
    sink(make_slow_point(n, sampler.next(), h0, eps));
  }
}

/// As for_each_crossing, but stops at the last crossing with t_n <= t_end.
inline void for_each_crossing_until(const PhaseState& state0, Epsilon eps, double t_end,
                                    const IntegratorConfig& cfg,
                                    const std::function<void(const SlowPoint&)>& sink) {
  detail::require_on_section(state0);
  if (!(t_end >= state0.t)) {
    throw ValidationError("invalid_interval", "t_end must not precede the initial time");
  }
  const auto dir = CrossingDirection::from_velocity(state0.ydot);
  const double h0 = hamiltonian(state0, eps);
  sink(make_slow_point(0, state0, h0, eps));
  SectionSampler sampler(state0, eps, dir, cfg);
  for (std::int64_t n = 1;; ++n) {
    const auto s = sampler.next();
    if (s.t > t_end) return;
    sink(make_slow_point(n, s, h0, eps));
  }
}

inline std::vector<SlowPoint> iterate_poincare(const PhaseState& state0, Epsilon eps,
                                               std::int64_t N, const IntegratorConfig& cfg) {
  std::vector<SlowPoint> out;
  out.reserve(static_cast<std::size_t>(N) + 1);
  for_each_crossing(state0, eps, N, cfg, [&out](const SlowPoint& p) { out.push_back(p); });
  return out;
}

/// Degenerate start y0 = ydot0 = 0: samples the per-loop local maximum of y
/// nearest the section. The leading-order y(t) = (2h/3) eps (cos^2 t + cos t - 2)
/// has maxima 0 and -(4h/3) eps; only those above -(2h/3) eps are kept.
inline std::vector<SlowPoint> iterate_degenerate(const PhaseState& state0, Epsilon eps,
                                                 std::int64_t N, const IntegratorConfig& cfg) {
  if (eps.value() == 0.0) {
    throw LostOscillationError("eps = 0 with ydot0 = 0: y stays identically zero");
  }
  const double h0 = hamiltonian(state0, eps);
  const double floor = -(2.0 / 3.0) * h0 * eps.value();
  std::vector<SlowPoint> out;
  out.reserve(static_cast<std::size_t>(N) + 1);
  out.push_back(make_slow_point(0, state0, h0, eps));
  SectionSampler sampler(state0, eps, CrossingDirection(1), cfg);
  for (std::int64_t n = 1; n <= N; ++n) {
    out.push_back(make_slow_point(n, sampler.next_local_max_above(floor), h0, eps));
  }
  return out;
}

struct QuasiPeriod {
  std::vector<double> loop_times;  ///< t_{n+1} - t_n
  double mean = 0.0;
  double max_deviation = 0.0;  ///< max |dt_n - 2 pi|
};

inline QuasiPeriod measure_quasi_period(std::span<const SlowPoint> points) {
  if (points.size() < 2) {
    throw ValidationError("too_few_points", "quasi-period needs at least two crossings");
  }
  QuasiPeriod q;
  q.loop_times.reserve(points.size() - 1);
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double dt = points[i].t - points[i - 1].t;
    q.loop_times.push_back(dt);
    q.max_deviation = std::max(q.max_deviation, std::abs(dt - 2.0 * std::numbers::pi));
  }
  q.mean = (points.back().t - points.front().t) / static_cast<double>(points.size() - 1);
  return q;
}

struct SlowPeriod {
  double period_t = 0.0;
  double period_n = 0.0;
  double total_phase = 0.0;  ///< unwrapped phase swept by (u_n, w_n)
};

/// Unwrapped phase atan2(w_n, u_n) along the sequence.
inline std::vector<double> unwrapped_phase(std::span<const SlowPoint> points) {
  std::vector<double> phase;
  phase.reserve(points.size());
  double offset = 0.0;
  double last = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double raw = std::atan2(points[i].w, points[i].u);
    if (i > 0) {
      const double d = raw + offset - last;
      if (d > std::numbers::pi) offset -= 2.0 * std::numbers::pi;
      if (d < -std::numbers::pi) offset += 2.0 * std::numbers::pi;
    }
    last = raw + offset;
    phase.push_back(last);
  }
  return phase;
}

/// Slow rotation period of (u_n, w_n), from linear fits of the unwrapped
/// phase against n and against t_n. Needs at least 1.5 periods of data.
inline SlowPeriod measure_slow_period(std::span<const SlowPoint> points) {
  if (points.size() < 3) {
    throw ValidationError("insufficient_span", "slow period needs at least three crossings");
  }
  const auto phase = unwrapped_phase(points);
  SlowPeriod out;
  out.total_phase = phase.back() - phase.front();
  if (std::abs(out.total_phase) < 1.5 * 2.0 * std::numbers::pi) {
    throw ValidationError("insufficient_span",
                          "sequence spans " + show(std::abs(out.total_phase) /
                                                             (2.0 * std::numbers::pi)) +
                              " slow periods; need at least 1.5");
  }
  std::vector<double> n(points.size()), t(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    n[i] = static_cast<double>(points[i].n);
    t[i] = points[i].t;
  }
  out.period_n = 2.0 * std::numbers::pi / std::abs(linear_fit(n, phase).slope);
  out.period_t = 2.0 * std::numbers::pi / std::abs(linear_fit(t, phase).slope);
  return out;
}

}  // namespace hhslow
