#pragma once

// Rescaled Henon-Heiles system
//
//   x'' = -x - 2 eps x y,     y'' = -y + eps y^2 - eps x^2,
//
// its energy, and the quadratic slow observables v = y^2 + y'^2,
// w = x'y' + xy, u = h - v.

#include <cmath>
#include <string>

#include "error.hpp"

namespace hhslow {

/// Coupling strength of the cubic term. eps = 0 decouples the oscillators.
class Epsilon {
 public:
  constexpr Epsilon() = default;
  explicit Epsilon(double value) : value_(value) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
      throw ValidationError("invalid_epsilon",
                            "epsilon must be finite and nonnegative, got " + show(value));
    }
  }
  constexpr double value() const noexcept { return value_; }
  friend constexpr bool operator==(Epsilon, Epsilon) = default;

 private:
  double value_ = 0.0;
};

struct PhaseState {
  double x = 0.0;
  double y = 0.0;
  double xdot = 0.0;
  double ydot = 0.0;
  double t = 0.0;

  bool finite() const noexcept {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(xdot) && std::isfinite(ydot) &&
           std::isfinite(t);
  }
  friend constexpr bool operator==(const PhaseState&, const PhaseState&) = default;
};

/// Time derivative of a PhaseState. `t` component is implicitly 1.
struct PhaseDerivative {
  double x = 0.0;
  double y = 0.0;
  double xdot = 0.0;
  double ydot = 0.0;
};

struct Acceleration {
  double x = 0.0;
  double y = 0.0;
};

struct SlowTriple {
  double v = 0.0;
  double w = 0.0;
  double u = 0.0;
  double h = 0.0;
};

inline Acceleration acceleration(double x, double y, Epsilon eps) noexcept {
  const double e = eps.value();
  return {-x - 2.0 * e * x * y, -y + e * y * y - e * x * x};
}

inline PhaseDerivative eom_rhs(const PhaseState& s, Epsilon eps) noexcept {
  const auto a = acceleration(s.x, s.y, eps);
  return {s.xdot, s.ydot, a.x, a.y};
}

inline double hamiltonian(const PhaseState& s, Epsilon eps) noexcept {
  const double e = eps.value();
  return 0.5 * (s.x * s.x + s.y * s.y + s.xdot * s.xdot + s.ydot * s.ydot) + e * s.x * s.x * s.y -
         (e / 3.0) * s.y * s.y * s.y;
}

/// `h` is the trajectory's conserved energy, taken from its initial state.
inline SlowTriple slow_variables(const PhaseState& s, double h) noexcept {
  SlowTriple out;
  out.v = s.y * s.y + s.ydot * s.ydot;
  out.w = s.xdot * s.ydot + s.x * s.y;
  out.u = h - out.v;
  out.h = h;
  return out;
}

enum class ScaleDirection { to_scaled, to_unscaled };

/// Maps between original Henon-Heiles coordinates and the eps-rescaled
/// ones: to_scaled multiplies coordinates and velocities by eps,
/// to_unscaled divides. Time is unchanged. Energies transform as h -> h/eps^2
/// under to_unscaled.
inline PhaseState rescale_state(const PhaseState& s, Epsilon eps, ScaleDirection dir) {
  const double e = eps.value();
  if (dir == ScaleDirection::to_unscaled) {
    if (e == 0.0) {
      throw ValidationError("degenerate_scale", "cannot rescale with eps = 0");
    }
    return {s.x / e, s.y / e, s.xdot / e, s.ydot / e, s.t};
  }
  return {s.x * e, s.y * e, s.xdot * e, s.ydot * e, s.t};
}

/// State on the section y = 0 with prescribed slow values. `ydot > 0` and the
/// sign of x follows `x_sign`. Requires 2hv - v^2 - w^2 >= 0 and v > 0.
inline PhaseState state_from_slow(double v, double w, double h, double x_sign = 1.0) {
  const double k = 2.0 * h * v - v * v - w * w;
  if (!(v > 0.0) || k < 0.0) {
    throw DomainError("no real state on y = 0 with v=" + show(v) +
                      ", w=" + show(w) + ", h=" + show(h));
  }
  const double ydot = std::sqrt(v);
  PhaseState s;
  s.ydot = ydot;
  s.xdot = w / ydot;
  s.x = std::copysign(std::sqrt(k) / ydot, x_sign);
  return s;
}

}  // namespace hhslow
