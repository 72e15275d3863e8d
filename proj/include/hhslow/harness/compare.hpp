#pragma once

// Prefix-maximum error between measured and predicted slow values.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "../error.hpp"
#include "../predictor.hpp"
#include "../section.hpp"
#include "config.hpp"

namespace hhslow::harness {

struct ErrorSeries {
  PredictorMode mode = PredictorMode::P2;
  std::vector<std::int64_t> n;
  std::vector<double> err_v;  ///< max_{k <= n} |v_k - v_pred_k|
  std::vector<double> err_w;  ///< max_{k <= n} |w_k - w_pred_k|
};

struct HorizonError {
  Regime regime = Regime::P2;
  std::int64_t horizon = 0;
  std::int64_t n = 0;  ///< min(horizon, last n)
  double err_v = 0.0;
  double err_w = 0.0;
};

struct CompareSummary {
  double max_err_v = 0.0;
  double max_err_w = 0.0;
  std::vector<HorizonError> at_horizons;
};

struct Comparison {
  ErrorSeries series;
  CompareSummary summary;
};

/// Horizon errors are reported when eps > 0.
inline Comparison compare(std::span<const SlowPoint> numeric, std::span<const SlowPair> predicted,
                          PredictorMode mode, Epsilon eps, double horizon_c = 0.5) {
  if (numeric.size() != predicted.size()) {
    throw ValidationError("length_mismatch", "numeric has " + show(numeric.size()) +
                                                 " points, prediction has " +
                                                 show(predicted.size()));
  }
  Comparison c;
  c.series.mode = mode;
  c.series.n.reserve(numeric.size());
  c.series.err_v.reserve(numeric.size());
  c.series.err_w.reserve(numeric.size());
  double mv = 0.0, mw = 0.0;
  for (std::size_t i = 0; i < numeric.size(); ++i) {
    // |v - (h - u_pred)| taken as |u - u_pred|: equal since u = h - v, and
    // free of the rounding in h - u_pred.
    mv = std::max(mv, std::abs(numeric[i].u - predicted[i].u));
    mw = std::max(mw, std::abs(numeric[i].w - predicted[i].w));
    c.series.n.push_back(numeric[i].n);
    c.series.err_v.push_back(mv);
    c.series.err_w.push_back(mw);
  }
  c.summary.max_err_v = mv;
  c.summary.max_err_w = mw;
  if (eps.value() > 0.0 && !numeric.empty()) {
    for (auto r : {Regime::series, Regime::P1, Regime::P2}) {
      HorizonError he;
      he.regime = r;
      he.horizon = validity_horizon(eps, r, horizon_c);
      const auto last = static_cast<std::int64_t>(numeric.size()) - 1;
      const auto idx = std::min(he.horizon, last);
      he.n = numeric[static_cast<std::size_t>(idx)].n;
      he.err_v = c.series.err_v[static_cast<std::size_t>(idx)];
      he.err_w = c.series.err_w[static_cast<std::size_t>(idx)];
      c.summary.at_horizons.push_back(he);
    }
  }
  return c;
}

inline std::string error_series_csv(const ErrorSeries& es) {
  std::string s = "n,err_v,err_w,mode\n";
  s.reserve(es.n.size() * 60);
  const std::string m(to_string(es.mode));
  for (std::size_t i = 0; i < es.n.size(); ++i) {
    s += std::to_string(es.n[i]) + ',' + format_double(es.err_v[i]) + ',' +
         format_double(es.err_w[i]) + ',' + m + '\n';
  }
  return s;
}

}  // namespace hhslow::harness
