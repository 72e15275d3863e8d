#pragma once

// Fixed-step propagation of the rescaled system.
//
// The Hamiltonian is separable, so the default methods are symmetric
// compositions of the kick-drift-kick leapfrog. They keep the energy error
// bounded over very long runs; `rk6` is a non-symplectic reference.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "model.hpp"
#include "runge_kutta.hpp"

namespace hhslow {

enum class Method { splitting4, splitting6, splitting8, rk6 };

inline constexpr std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::splitting4: return "splitting4";
    case Method::splitting6: return "splitting6";
    case Method::splitting8: return "splitting8";
    case Method::rk6: return "rk6";
  }
  return "unknown";
}

inline Method parse_method(std::string_view name) {
  for (Method m : {Method::splitting4, Method::splitting6, Method::splitting8, Method::rk6}) {
    if (name == to_string(m)) return m;
  }
  throw ValidationError("invalid_method", "unknown integrator method '" + std::string(name) + "'");
}

inline constexpr int method_order(Method m) noexcept {
  switch (m) {
    case Method::splitting4: return 4;
    case Method::splitting6: return 6;
    case Method::splitting8: return 8;
    case Method::rk6: return 6;
  }
  return 0;
}

/// 64 steps per unperturbed period.
inline constexpr double kDefaultStep = 2.0 * std::numbers::pi / 64.0;

struct IntegratorConfig {
  Method method = Method::splitting8;
  double step_size = kDefaultStep;
  /// Relative energy drift |h(t) - h0| / |h0| allowed before integrate_to fails.
  double drift_tolerance = 1e-9;

  void validate() const {
    if (!(step_size > 0.0) || !std::isfinite(step_size)) {
      throw ValidationError("invalid_step", "step_size must be positive and finite");
    }
    if (!(drift_tolerance > 0.0)) {
      throw ValidationError("invalid_tolerance", "drift_tolerance must be positive");
    }
  }
  friend bool operator==(const IntegratorConfig&, const IntegratorConfig&) = default;
};

namespace detail {

/// Leapfrog weights w_i of a symmetric composition prod_i S2(w_i dt).
template <std::size_t M>
constexpr std::array<double, M> mirror(const std::array<double, M / 2 + 1>& half) {
  // half = {w_m, ..., w_1, w_0}; the sum of all weights must be one.
  std::array<double, M> out{};
  for (std::size_t i = 0; i <= M / 2; ++i) {
    out[i] = half[i];
    out[M - 1 - i] = half[i];
  }
  return out;
}

inline const std::array<double, 3>& triple_jump_weights() {
  static const std::array<double, 3> w = [] {
    const double cbrt2 = std::cbrt(2.0);
    const double z1 = 1.0 / (2.0 - cbrt2);
    return std::array<double, 3>{z1, -cbrt2 * z1, z1};
  }();
  return w;
}

// Yoshida (1990), sixth order, solution A.
inline const std::array<double, 7>& yoshida6_weights() {
  static const std::array<double, 7> w = [] {
    const double w1 = -1.17767998417887;
    const double w2 = 0.235573213359357;
    const double w3 = 0.784513610477560;
    const double w0 = 1.0 - 2.0 * (w1 + w2 + w3);
    return mirror<7>({w3, w2, w1, w0});
  }();
  return w;
}

// Yoshida (1990), eighth order, solution D.
inline const std::array<double, 15>& yoshida8_weights() {
  static const std::array<double, 15> w = [] {
    const double w1 = 0.102799849391985;
    const double w2 = -0.196061023297549e1;
    const double w3 = 0.193813913762276e1;
    const double w4 = -0.158240635368243;
    const double w5 = -0.144485223686048e1;
    const double w6 = 0.253693336566229;
    const double w7 = 0.914844246229740;
    const double w0 = 1.0 - 2.0 * (w1 + w2 + w3 + w4 + w5 + w6 + w7);
    return mirror<15>({w7, w6, w5, w4, w3, w2, w1, w0});
  }();
  return w;
}

inline std::span<const double> composition_weights(Method m) {
  switch (m) {
    case Method::splitting4: return triple_jump_weights();
    case Method::splitting6: return yoshida6_weights();
    case Method::splitting8: return yoshida8_weights();
    case Method::rk6: break;
  }
  return {};
}

inline PhaseState composition_step(PhaseState s, double dt, Epsilon eps,
                                   std::span<const double> weights) {
  // Adjacent half kicks of consecutive leapfrogs are merged.
  double pending_kick = 0.5 * weights.front();
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const auto a = acceleration(s.x, s.y, eps);
    s.xdot += pending_kick * dt * a.x;
    s.ydot += pending_kick * dt * a.y;
    s.x += weights[i] * dt * s.xdot;
    s.y += weights[i] * dt * s.ydot;
    pending_kick = 0.5 * (weights[i] + (i + 1 < weights.size() ? weights[i + 1] : 0.0));
  }
  const auto a = acceleration(s.x, s.y, eps);
  s.xdot += pending_kick * dt * a.x;
  s.ydot += pending_kick * dt * a.y;
  return s;
}

inline PhaseState rk6_step(const PhaseState& s, double dt, Epsilon eps) {
  using V4 = Vec<double, 4>;
  const auto f = [eps](double, const V4& q) {
    const auto a = acceleration(q[0], q[1], eps);
    return V4{{q[2], q[3], a.x, a.y}};
  };
  const V4 q = rk_step(kButcherRk6, f, s.t, V4{{s.x, s.y, s.xdot, s.ydot}}, dt);
  return {q[0], q[1], q[2], q[3], s.t};
}

}  // namespace detail

/// Advances `state` by `dt` (negative allowed) with the configured method.
/// The returned time is `state.t + dt`.
inline PhaseState step(const PhaseState& state, double dt, Epsilon eps,
                       const IntegratorConfig& cfg) {
  if (!state.finite()) {
    throw NumericQualityError("non_finite_state", "cannot propagate a non-finite state");
  }
  if (dt == 0.0 || !std::isfinite(dt)) {
    throw ValidationError("invalid_step", "step requires a finite nonzero dt");
  }
  PhaseState out = cfg.method == Method::rk6
                       ? detail::rk6_step(state, dt, eps)
                       : detail::composition_step(state, dt, eps,
                                                  detail::composition_weights(cfg.method));
  out.t = state.t + dt;
  if (!out.finite()) {
    throw NumericQualityError("non_finite_state",
                              "propagation produced a non-finite state at t=" +
                                  show(out.t));
  }
  return out;
}

/// Fixed-grid propagator. Grid times are t0 + k*dt, so no rounding error
/// accumulates in t over long runs.
class Propagator {
 public:
  Propagator(const PhaseState& initial, Epsilon eps, IntegratorConfig cfg)
      : state_(initial), t0_(initial.t), eps_(eps), cfg_(cfg),
        h0_(hamiltonian(initial, eps)) {
    cfg_.validate();
    if (!initial.finite()) {
      throw ValidationError("non_finite_state", "initial state must be finite");
    }
  }

  /// One grid step; throws DriftError when the energy leaves tolerance.
  const PhaseState& advance() {
    state_ = step(state_, cfg_.step_size, eps_, cfg_);
    ++steps_;
    state_.t = t0_ + static_cast<double>(steps_) * cfg_.step_size;
    check_drift(state_);
    return state_;
  }

  /// Relative drift of `s` against the initial energy; records the maximum.
  double check_drift(const PhaseState& s) {
    const double d = std::abs(hamiltonian(s, eps_) - h0_);
    const double rel = h0_ != 0.0 ? d / std::abs(h0_) : d;
    if (d > max_drift_) max_drift_ = d;
    if (rel > cfg_.drift_tolerance) {
      throw DriftError(s.t, rel,
                       "relative energy drift " + show(rel) + " exceeds tolerance " +
                           show(cfg_.drift_tolerance) + " at t=" + show(s.t));
    }
    return rel;
  }

  const PhaseState& state() const noexcept { return state_; }
  double h0() const noexcept { return h0_; }
  double max_drift() const noexcept { return max_drift_; }
  std::int64_t steps() const noexcept { return steps_; }
  Epsilon eps() const noexcept { return eps_; }
  const IntegratorConfig& config() const noexcept { return cfg_; }

 private:
  PhaseState state_;
  double t0_;
  Epsilon eps_;
  IntegratorConfig cfg_;
  double h0_;
  double max_drift_ = 0.0;
  std::int64_t steps_ = 0;
};

struct Trajectory {
  std::vector<PhaseState> samples;
  Epsilon eps;
  double h0 = 0.0;
  /// Largest |h(t) - h0| over every step taken, sampled or not.
  double max_drift = 0.0;
};

/// Integrates to exactly `t_end`, keeping every `sample_every`-th grid
/// state plus the final one.
inline Trajectory integrate_to(const PhaseState& state, double t_end, Epsilon eps,
                               const IntegratorConfig& cfg, std::int64_t sample_every = 1) {
  if (!(t_end >= state.t)) {
    throw ValidationError("invalid_interval", "t_end must not precede the initial time");
  }
  if (sample_every < 1) {
    throw ValidationError("invalid_stride", "sample_every must be at least 1");
  }
  Propagator prop(state, eps, cfg);
  Trajectory traj;
  traj.eps = eps;
  traj.h0 = prop.h0();
  traj.samples.push_back(state);
  if (t_end == state.t) return traj;

  const double span = t_end - state.t;
  const auto full_steps = static_cast<std::int64_t>(std::floor(span / cfg.step_size));
  for (std::int64_t k = 1; k <= full_steps; ++k) {
    const auto& s = prop.advance();
    if (k % sample_every == 0 && s.t < t_end) traj.samples.push_back(s);
  }
  PhaseState last = prop.state();
  const double remaining = t_end - last.t;
  if (remaining > 0.0) {
    last = step(last, remaining, eps, cfg);
    prop.check_drift(last);
  }
  last.t = t_end;
  if (traj.samples.back().t == t_end) {
    traj.samples.back() = last;
  } else {
    traj.samples.push_back(last);
  }
  traj.max_drift = prop.max_drift();
  return traj;
}

inline double energy_drift(const Trajectory& traj, Epsilon eps) {
  if (traj.samples.empty()) {
    throw ValidationError("empty_trajectory", "energy_drift needs at least one sample");
  }
  double worst = 0.0;
  for (const auto& s : traj.samples) {
    worst = std::max(worst, std::abs(hamiltonian(s, eps) - traj.h0));
  }
  return worst;
}

}  // namespace hhslow
