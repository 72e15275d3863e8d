#pragma once

// Least-squares fits used by the convergence and scaling checks.

#include <cmath>
#include <span>
#include <vector>

#include "error.hpp"

namespace hhslow {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ValidationError("invalid_fit", "linear fit needs two or more paired values");
  }
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw ValidationError("invalid_fit", "linear fit needs distinct abscissae");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

/// Slope of log|y| against log x. Zero or non-finite values are rejected.
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx, ly;
  lx.reserve(x.size());
  ly.reserve(y.size());
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (!(x[i] > 0.0) || !(std::abs(y[i]) > 0.0) || !std::isfinite(y[i])) {
      throw ValidationError("invalid_fit", "log-log fit needs positive finite values");
    }
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(std::abs(y[i])));
  }
  return linear_fit(lx, ly).slope;
}

}  // namespace hhslow
