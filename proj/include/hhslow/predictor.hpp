#pragma once

// Analytic predictors for the slow pair (u_n, w_n) at the n-th crossing.
//
//   P1  rigid rotation  sqrt(T0) (cos phi_n, sin phi_n),
//       phi_n = phi0 + beta n eps^2 sqrt(h^2 - T0)
//   P2  iterated truncated map
//       u' = u - beta eps^2 w sqrt(h^2 - T),  w' = w + beta eps^2 u sqrt(h^2 - T)
//   P3  phase sum  phi_n = phi0 + beta eps^2 sum_{k<n} sqrt(h^2 - T_k), radius sqrt(T_n)
//
// with T = u^2 + w^2 and beta = 14 pi / 3.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "compensated.hpp"
#include "error.hpp"
#include "model.hpp"

namespace hhslow {

inline constexpr double kBeta = 14.0 * std::numbers::pi / 3.0;

enum class PredictorMode { P1, P2, P3 };

inline constexpr std::string_view to_string(PredictorMode m) noexcept {
  switch (m) {
    case PredictorMode::P1: return "P1";
    case PredictorMode::P2: return "P2";
    case PredictorMode::P3: return "P3";
  }
  return "unknown";
}

inline PredictorMode parse_mode(std::string_view name) {
  for (auto m : {PredictorMode::P1, PredictorMode::P2, PredictorMode::P3}) {
    if (name == to_string(m)) return m;
  }
  throw ValidationError("invalid_mode", "unknown predictor mode '" + std::string(name) + "'");
}

struct SlowPair {
  double u = 0.0;
  double w = 0.0;

  double radius_sq() const noexcept { return u * u + w * w; }
  friend bool operator==(const SlowPair&, const SlowPair&) = default;
};

struct PredictorInput {
  double u0 = 0.0;
  double w0 = 0.0;
  double h = 0.0;
  Epsilon eps;
  PredictorMode mode = PredictorMode::P2;

  double t0() const noexcept { return u0 * u0 + w0 * w0; }

  void validate() const {
    if (!std::isfinite(u0) || !std::isfinite(w0) || !std::isfinite(h)) {
      throw ValidationError("invalid_input", "predictor input must be finite");
    }
    if (t0() > h * h) {
      throw DomainError("u0^2 + w0^2 = " + show(t0()) + " exceeds h^2 = " +
                        show(h * h));
    }
  }
};

/// Argument of u0 + i w0 in (-pi, pi].
inline double phase0(double u0, double w0) {
  if (u0 == 0.0 && w0 == 0.0) {
    throw DomainError("phase of (u0, w0) = (0, 0) is undefined");
  }
  return std::atan2(w0, u0);
}

/// Phase advance per crossing of the P1 rotation.
inline double p1_phase_rate(double u0, double w0, double h, Epsilon eps) {
  const double k = h * h - (u0 * u0 + w0 * w0);
  if (k < 0.0) throw DomainError("u0^2 + w0^2 exceeds h^2");
  const double e = eps.value();
  return kBeta * e * e * std::sqrt(k);
}

/// Slow periods of the P1 rotation, in crossings and in time (2 pi per crossing).
struct PredictedPeriod {
  double period_n = 0.0;
  double period_t = 0.0;
};

inline PredictedPeriod p1_slow_period(double u0, double w0, double h, Epsilon eps) {
  const double rate = p1_phase_rate(u0, w0, h, eps);
  if (rate == 0.0) throw DomainError("P1 rotation is stationary");
  const double pn = 2.0 * std::numbers::pi / rate;
  return {pn, 2.0 * std::numbers::pi * pn};
}

inline SlowPair truncated_map_step(double u, double w, double h, Epsilon eps) {
  const double t = std::fma(u, u, w * w);
  if (t > h * h) {
    throw DomainError("u^2 + w^2 = " + show(t) + " exceeds h^2 = " +
                      show(h * h));
  }
  // On the boundary circle t is a rounded h^2 and the fma may leave a
  // negative residue of that rounding.
  const double k = std::max(0.0, std::fma(h, h, -t));
  const double e = eps.value();
  const double rot = kBeta * e * e * std::sqrt(k);
  return {std::fma(-rot, w, u), std::fma(rot, u, w)};
}

/// T' - T - beta^2 eps^4 T (h^2 - T) for one map step from (u, w), with the
/// squares taken exactly.
inline double truncated_map_identity_residual(double u, double w, double h, Epsilon eps) {
  const auto next = truncated_map_step(u, w, h, eps);
  const DoubleDouble t = two_prod(u, u) + two_prod(w, w);
  const DoubleDouble t1 = two_prod(next.u, next.u) + two_prod(next.w, next.w);
  const double e = eps.value();
  const double b = kBeta * e * e;
  const double gain = b * b * t.value() * (two_prod(h, h) - t).value();
  return ((t1 - t) - DoubleDouble{gain, 0.0}).value();
}

namespace detail {

inline void require_phase_source(std::span<const double> t_source, std::int64_t n) {
  if (static_cast<std::int64_t>(t_source.size()) < n + 1) {
    throw ValidationError("short_source", "P3 needs T_k for k = 0.." + show(n));
  }
}

inline std::vector<SlowPair> p2_sequence(const PredictorInput& in, std::int64_t n) {
  std::vector<SlowPair> out;
  out.reserve(static_cast<std::size_t>(n) + 1);
  SlowPair p{in.u0, in.w0};
  out.push_back(p);
  for (std::int64_t k = 0; k < n; ++k) {
    p = truncated_map_step(p.u, p.w, in.h, in.eps);
    out.push_back(p);
  }
  return out;
}

inline std::vector<double> radius_sq_of(std::span<const SlowPair> pairs) {
  std::vector<double> t;
  t.reserve(pairs.size());
  for (const auto& p : pairs) t.push_back(p.radius_sq());
  return t;
}

}  // namespace detail

/// Predictions for n = 0..N. P3 reads T_k from `t_source` (length >= N+1);
/// when it is empty, the P2 radii are used.
inline std::vector<SlowPair> predict_sequence(const PredictorInput& in, std::int64_t N,
                                              std::span<const double> t_source = {}) {
  in.validate();
  if (N < 0) throw ValidationError("invalid_count", "prediction count must be nonnegative");
  const double e = in.eps.value();
  const SlowPair start{in.u0, in.w0};

  if (in.mode == PredictorMode::P2) return detail::p2_sequence(in, N);

  std::vector<SlowPair> out;
  out.reserve(static_cast<std::size_t>(N) + 1);
  out.push_back(start);
  if (N == 0) return out;
  if (e == 0.0) {
    out.assign(static_cast<std::size_t>(N) + 1, start);
    return out;
  }
  const double phi0 = phase0(in.u0, in.w0);

  if (in.mode == PredictorMode::P1) {
    const double r = std::sqrt(in.t0());
    const double rate = p1_phase_rate(in.u0, in.w0, in.h, in.eps);
    for (std::int64_t n = 1; n <= N; ++n) {
      const double phi = phi0 + static_cast<double>(n) * rate;
      out.push_back({r * std::cos(phi), r * std::sin(phi)});
    }
    return out;
  }

  std::vector<double> own;
  if (t_source.empty()) {
    own = detail::radius_sq_of(detail::p2_sequence(in, N));
    t_source = own;
  }
  detail::require_phase_source(t_source, N);
  const double b = kBeta * e * e;
  const double h2 = in.h * in.h;
  CompensatedSum<double> sum;
  for (std::int64_t n = 1; n <= N; ++n) {
    const double k = h2 - t_source[static_cast<std::size_t>(n - 1)];
    if (k < 0.0) throw DomainError("T_k exceeds h^2 at k = " + show(n - 1));
    sum += std::sqrt(k);
    const double phi = phi0 + b * sum.value();
    const double r = std::sqrt(t_source[static_cast<std::size_t>(n)]);
    out.push_back({r * std::cos(phi), r * std::sin(phi)});
  }
  return out;
}

inline SlowPair predict(const PredictorInput& in, std::int64_t n,
                        std::span<const double> t_source = {}) {
  if (n == 0) {
    in.validate();
    return {in.u0, in.w0};
  }
  if (in.mode == PredictorMode::P1) {
    // Closed form; no need to build the sequence.
    in.validate();
    if (in.eps.value() == 0.0) return {in.u0, in.w0};
    const double phi = phase0(in.u0, in.w0) +
                       static_cast<double>(n) * p1_phase_rate(in.u0, in.w0, in.h, in.eps);
    const double r = std::sqrt(in.t0());
    return {r * std::cos(phi), r * std::sin(phi)};
  }
  return predict_sequence(in, n, t_source).back();
}

struct SlowOdeValue {
  double v = 0.0;
  double w = 0.0;
};

/// Solution of the averaged slow ODE in the loop count n:
/// V = h + A sin(n beta' eps^2 + B), W = A cos(n beta' eps^2 + B),
/// A = sqrt(T0), B = atan2(-u0, w0), beta' = beta sqrt(2 h v0 - v0^2 - w0^2).
inline SlowOdeValue slow_ode_solution(double v0, double w0, double h, Epsilon eps, double n) {
  const double k0 = 2.0 * h * v0 - v0 * v0 - w0 * w0;
  if (k0 < 0.0) {
    throw DomainError("2 h v0 - v0^2 - w0^2 = " + show(k0) + " is negative");
  }
  if (n == 0.0) return {v0, w0};
  const double u0 = h - v0;
  const double a = std::hypot(u0, w0);
  const double b = std::atan2(-u0, w0);
  const double e = eps.value();
  const double arg = n * kBeta * std::sqrt(k0) * e * e + b;
  return {h + a * std::sin(arg), a * std::cos(arg)};
}

enum class Regime { series, P1, P2 };

inline constexpr std::string_view to_string(Regime r) noexcept {
  switch (r) {
    case Regime::series: return "series";
    case Regime::P1: return "P1";
    case Regime::P2: return "P2";
  }
  return "unknown";
}

/// Largest n with n eps^p <= c, p = 2 (series), 5/2 (P1), 3 (P2 and P3).
inline std::int64_t validity_horizon(Epsilon eps, Regime regime, double c = 0.5) {
  const double e = eps.value();
  if (!(e > 0.0)) throw ValidationError("invalid_epsilon", "validity horizon needs eps > 0");
  if (!(c > 0.0)) throw ValidationError("invalid_constant", "horizon constant must be positive");
  const double p = regime == Regime::series ? 2.0 : regime == Regime::P1 ? 2.5 : 3.0;
  // The relative nudge keeps exact quotients such as 0.5 / 0.01^2 from
  // rounding down past an integer.
  const double x = c / std::pow(e, p) * (1.0 + 1e-12);
  if (x >= static_cast<double>(std::numeric_limits<std::int64_t>::max())) {
    return std::numeric_limits<std::int64_t>::max();
  }
  return static_cast<std::int64_t>(std::floor(x));
}

}  // namespace hhslow
