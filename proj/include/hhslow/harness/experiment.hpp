#pragma once

// Experiment orchestration. Every run writes into cfg.out_dir:
//
//   config.ini          exact configuration (round-trips through parse_config)
//   metadata.json       version, derived constants, summaries
//   slow_points.csv     measured crossings
//   predictions_P*.csv  predictor output per mode
//   errors_P*.csv       prefix-maximum errors per mode
//   *.svg               when cfg.plot is set
//
// On failure an error.json report is written before the exception escapes.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <future>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "../contour.hpp"
#include "../error.hpp"
#include "../integrate.hpp"
#include "../predictor.hpp"
#include "../section.hpp"
#include "../series.hpp"
#include "../stats.hpp"
#include "../version.hpp"
#include "compare.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "plot.hpp"

namespace hhslow::harness {

using json = nlohmann::ordered_json;

struct ModeResult {
  PredictorMode mode = PredictorMode::P2;
  std::vector<SlowPair> predicted;
  Comparison comparison;
};

struct ExperimentResult {
  std::filesystem::path dir;
  double h0 = 0.0;
  std::vector<SlowPoint> points;
  std::vector<ModeResult> modes;
  double max_drift = 0.0;
  /// Path length of (u_n, w_n) per unit time: sum |delta (u, w)| / (t_N - t_0).
  double slow_speed = 0.0;
};

namespace detail {

inline json error_json(const std::exception& e) {
  json j;
  if (const auto* he = dynamic_cast<const Error*>(&e)) {
    j["kind"] = he->kind() == ErrorKind::validation        ? "validation"
                : he->kind() == ErrorKind::numeric_quality ? "numeric_quality"
                                                           : "io";
    j["code"] = he->code();
    j["exit_code"] = he->exit_code();
    if (const auto* de = dynamic_cast<const DriftError*>(&e)) {
      j["time"] = de->time();
      j["drift"] = de->drift();
    }
  } else {
    j["kind"] = "internal";
    j["code"] = "internal";
    j["exit_code"] = 1;
  }
  j["message"] = e.what();
  return j;
}

/// Runs `body`; on failure writes <dir>/error.json and rethrows.
template <typename F>
auto with_error_report(const std::filesystem::path& dir, F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    try {
      write_text_file(dir / "error.json", error_json(e).dump(2) + "\n");
    } catch (...) {
      // The original error is more informative than a failed report.
    }
    throw;
  }
}

inline json config_json(const ExperimentConfig& c) {
  json j;
  const auto text = serialize_config(c);
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto eol = text.find('\n', pos);
    const auto line = std::string_view(text).substr(pos, eol - pos);
    const auto eq = line.find(" = ");
    j[std::string(line.substr(0, eq))] = std::string(line.substr(eq + 3));
    pos = eol + 1;
  }
  return j;
}

inline json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline double slow_speed(std::span<const SlowPoint> pts) {
  if (pts.size() < 2) return 0.0;
  double len = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    len += std::hypot(pts[i].u - pts[i - 1].u, pts[i].w - pts[i - 1].w);
  }
  return len / (pts.back().t - pts.front().t);
}

}  // namespace detail

/// Crossings for the configured run length: N crossings, or all with t_n <= t_end.
inline std::vector<SlowPoint> sample_crossings(const ExperimentConfig& cfg) {
  const Epsilon eps(cfg.eps);
  if (cfg.t_end > 0.0) {
    std::vector<SlowPoint> pts;
    for_each_crossing_until(cfg.initial, eps, cfg.t_end, cfg.integrator,
                            [&pts](const SlowPoint& p) { pts.push_back(p); });
    return pts;
  }
  return iterate_poincare(cfg.initial, eps, cfg.crossings, cfg.integrator);
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const std::filesystem::path dir(cfg.out_dir);
  return detail::with_error_report(dir, [&] {
    cfg.validate();
    const Epsilon eps(cfg.eps);
    ExperimentResult res;
    res.dir = dir;
    res.h0 = hamiltonian(cfg.initial, eps);
    res.points = sample_crossings(cfg);
    for (const auto& p : res.points) res.max_drift = std::max(res.max_drift, p.h_resid);
    res.slow_speed = detail::slow_speed(res.points);
    const auto N = static_cast<std::int64_t>(res.points.size()) - 1;
    const auto& p0 = res.points.front();

    for (const auto& mode : cfg.modes) {
      PredictorInput in{p0.u, p0.w, res.h0, eps, mode};
      ModeResult mr;
      mr.mode = mode;
      mr.predicted = predict_sequence(in, N);
      mr.comparison = compare(res.points, mr.predicted, mode, eps, cfg.horizon_c);
      res.modes.push_back(std::move(mr));
    }

    write_text_file(dir / "config.ini", serialize_config(cfg));
    write_text_file(dir / "slow_points.csv", slow_points_csv(res.points));
    for (const auto& mr : res.modes) {
      const std::string m(to_string(mr.mode));
      write_text_file(dir / ("predictions_" + m + ".csv"), predictions_csv(mr.predicted, mr.mode));
      write_text_file(dir / ("errors_" + m + ".csv"), error_series_csv(mr.comparison.series));
    }

    json meta;
    meta["version"] = std::string(kVersion);
    meta["command"] = "compare";
    meta["config"] = detail::config_json(cfg);
    meta["h0"] = res.h0;
    meta["u0"] = p0.u;
    meta["w0"] = p0.w;
    const double t0 = p0.u * p0.u + p0.w * p0.w;
    meta["T0"] = t0;
    meta["phi0"] = t0 > 0.0 ? json(phase0(p0.u, p0.w)) : json(nullptr);
    if (cfg.eps > 0.0) {
      for (auto r : {Regime::series, Regime::P1, Regime::P2}) {
        meta["horizons"][std::string(to_string(r))] = validity_horizon(eps, r, cfg.horizon_c);
      }
    } else {
      meta["horizons"] = nullptr;
    }
    meta["crossings"] = N;
    meta["t_last"] = res.points.back().t;
    meta["max_energy_residual"] = res.max_drift;
    meta["slow_speed"] = res.slow_speed;
    if (N >= 1) {
      const auto qp = measure_quasi_period(res.points);
      meta["quasi_period_mean"] = qp.mean;
      meta["quasi_period_max_deviation"] = qp.max_deviation;
    }
    for (const auto& mr : res.modes) {
      json s;
      s["max_err_v"] = mr.comparison.summary.max_err_v;
      s["max_err_w"] = mr.comparison.summary.max_err_w;
      s["max_err_v_over_sqrtT0"] =
          t0 > 0.0 ? detail::number_or_null(mr.comparison.summary.max_err_v / std::sqrt(t0))
                   : json(nullptr);
      for (const auto& he : mr.comparison.summary.at_horizons) {
        json h;
        h["horizon"] = he.horizon;
        h["n"] = he.n;
        h["err_v"] = he.err_v;
        h["err_w"] = he.err_w;
        s["at_horizon"][std::string(to_string(he.regime))] = h;
      }
      meta["summary"][std::string(to_string(mr.mode))] = s;
    }
    write_text_file(dir / "metadata.json", meta.dump(2) + "\n");

    if (cfg.plot) {
      std::vector<double> n, v;
      for (const auto& p : res.points) {
        n.push_back(static_cast<double>(p.n));
        v.push_back(p.v);
      }
      for (const auto& mr : res.modes) {
        std::vector<double> vp, en, ev;
        for (const auto& q : mr.predicted) vp.push_back(res.h0 - q.u);
        const std::string m(to_string(mr.mode));
        const std::vector<PlotSeries> overlay{{"numeric", n, v, ""}, {m, n, vp, ""}};
        emit_plot(overlay, {"v_n: numeric vs " + m, "n", "v_n"}, dir / ("v_overlay_" + m + ".svg"));
        for (std::size_t i = 1; i < mr.comparison.series.n.size(); ++i) {
          en.push_back(static_cast<double>(mr.comparison.series.n[i]));
          ev.push_back(mr.comparison.series.err_v[i]);
        }
        if (!en.empty()) {
          const std::vector<PlotSeries> err{{"max |v_num - v_" + m + "|", en, ev, ""}};
          emit_plot(err, {"prefix-max error, " + m, "n", "error"}, dir / ("errors_" + m + ".svg"));
        }
      }
    }
    return res;
  });
}

struct SimulationResult {
  Trajectory trajectory;
};

/// Plain trajectory to cfg.t_end (2 pi * crossings when t_end is zero).
inline SimulationResult run_simulation(const ExperimentConfig& cfg) {
  const std::filesystem::path dir(cfg.out_dir);
  return detail::with_error_report(dir, [&] {
    cfg.validate();
    const Epsilon eps(cfg.eps);
    const double t_end = cfg.t_end > 0.0
                             ? cfg.t_end
                             : cfg.initial.t + 2.0 * std::numbers::pi * static_cast<double>(cfg.crossings);
    SimulationResult res{integrate_to(cfg.initial, t_end, eps, cfg.integrator, cfg.sample_every)};
    const auto& tr = res.trajectory;
    write_text_file(dir / "config.ini", serialize_config(cfg));
    write_text_file(dir / "trajectory.csv", trajectory_csv(tr.samples, tr.h0));
    json meta;
    meta["version"] = std::string(kVersion);
    meta["command"] = "simulate";
    meta["config"] = detail::config_json(cfg);
    meta["h0"] = tr.h0;
    meta["t_end"] = t_end;
    meta["samples"] = tr.samples.size();
    meta["max_energy_drift"] = tr.max_drift;
    meta["max_relative_energy_drift"] = tr.h0 != 0.0 ? tr.max_drift / std::abs(tr.h0) : tr.max_drift;
    write_text_file(dir / "metadata.json", meta.dump(2) + "\n");
    if (cfg.plot) {
      std::vector<double> t, x, y;
      for (const auto& s : tr.samples) {
        t.push_back(s.t);
        x.push_back(s.x);
        y.push_back(s.y);
      }
      const std::vector<PlotSeries> xs{{"x", t, x, ""}, {"y", t, y, ""}};
      emit_plot(xs, {"trajectory", "t", "x, y"}, dir / "trajectory.svg");
    }
    return res;
  });
}

struct SweepRow {
  double eps = 0.0;
  std::int64_t crossings = 0;
  double t_last = 0.0;
  double slow_speed = 0.0;
  double max_drift = 0.0;
};

/// Member runs at each cfg.sweep_eps, executed concurrently. Outputs go to
/// <out_dir>/eps_<value>/ and a summary table to <out_dir>/sweep.csv, in
/// config order.
inline std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg) {
  const std::filesystem::path dir(cfg.out_dir);
  return detail::with_error_report(dir, [&] {
    cfg.validate();
    if (cfg.sweep_eps.empty()) throw ValidationError("invalid_config", "sweep.eps is empty");
    std::vector<std::future<ExperimentResult>> jobs;
    for (double e : cfg.sweep_eps) {
      ExperimentConfig member = cfg;
      member.eps = e;
      member.sweep_eps.clear();
      member.name = cfg.name + "_eps_" + format_double(e);
      member.out_dir = (dir / ("eps_" + format_double(e))).string();
      jobs.push_back(std::async(std::launch::async, [member] { return run_experiment(member); }));
    }
    std::vector<SweepRow> rows;
    std::string csv = "eps,crossings,t_last,slow_speed,max_energy_residual\n";
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      const auto r = jobs[i].get();
      SweepRow row{cfg.sweep_eps[i], static_cast<std::int64_t>(r.points.size()) - 1,
                   r.points.back().t, r.slow_speed, r.max_drift};
      rows.push_back(row);
      csv += format_double(row.eps) + ',' + std::to_string(row.crossings) + ',' +
             format_double(row.t_last) + ',' + format_double(row.slow_speed) + ',' +
             format_double(row.max_drift) + '\n';
    }
    write_text_file(dir / "config.ini", serialize_config(cfg));
    write_text_file(dir / "sweep.csv", csv);
    json meta;
    meta["version"] = std::string(kVersion);
    meta["command"] = "sweep";
    meta["config"] = detail::config_json(cfg);
    bool monotone = true;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if ((rows[i].eps < rows[i - 1].eps) != (rows[i].slow_speed < rows[i - 1].slow_speed)) {
        monotone = false;
      }
    }
    meta["slow_speed_monotone_in_eps"] = monotone;
    write_text_file(dir / "metadata.json", meta.dump(2) + "\n");
    return rows;
  });
}

/// One-loop contour residuals over cfg.contour_eps plus a section cross-check
/// at cfg.eps, starting from the slow values of cfg.initial.
inline json run_contour_check(const ExperimentConfig& cfg) {
  const std::filesystem::path dir(cfg.out_dir);
  return detail::with_error_report(dir, [&] {
    cfg.validate();
    const Epsilon eps(cfg.eps);
    const double h = hamiltonian(cfg.initial, eps);
    const auto sv = slow_variables(cfg.initial, h);
    ContourOptions opts;
    opts.nodes_per_circle = cfg.contour_nodes;
    opts.x_sign = cfg.initial.x < 0.0 ? -1.0 : 1.0;
    const auto table = one_loop_increment_check(sv.v, sv.w, h, cfg.contour_eps, opts);

    json j;
    j["version"] = std::string(kVersion);
    j["command"] = "contour-check";
    j["config"] = detail::config_json(cfg);
    j["v0"] = sv.v;
    j["w0"] = sv.w;
    j["h"] = h;
    j["nodes_per_circle"] = cfg.contour_nodes;
    for (const auto& r : table.rows) {
      j["rows"].push_back({{"eps", r.eps}, {"v1", r.v1}, {"w1", r.w1}, {"t1", r.t1},
                           {"r_v", r.r_v}, {"r_w", r.r_w}});
    }
    j["slope_v"] = detail::number_or_null(table.slope_v);
    j["slope_w"] = detail::number_or_null(table.slope_w);

    const auto loop = integrate_contour(sv.v, sv.w, h, eps, opts);
    j["diagnostics"] = {{"nodes", loop.diagnostics.nodes},
                        {"winding_q_over_pi", loop.diagnostics.winding_q / std::numbers::pi},
                        {"winding_s_over_pi", loop.diagnostics.winding_s / std::numbers::pi},
                        {"max_sqrt_step", loop.diagnostics.max_sqrt_step},
                        {"imag_residual", loop.diagnostics.imag_residual},
                        {"sqrt_q_returned", loop.diagnostics.sqrt_q_returned},
                        {"x_closure", loop.diagnostics.x_closure}};
    const auto pts = iterate_poincare(cfg.initial, eps, 1, cfg.integrator);
    j["section_check"] = {{"eps", cfg.eps},
                          {"contour_v1", loop.v1},
                          {"contour_w1", loop.w1},
                          {"contour_t1", loop.t1},
                          {"section_v1", pts[1].v},
                          {"section_w1", pts[1].w},
                          {"section_t1", pts[1].t},
                          {"diff_v", loop.v1 - pts[1].v},
                          {"diff_w", loop.w1 - pts[1].w}};
    write_text_file(dir / "config.ini", serialize_config(cfg));
    write_text_file(dir / "contour.json", j.dump(2) + "\n");
    return j;
  });
}

/// Series against integration: a residual table over cfg.series_eps at
/// t = cfg.series_t, and a time series at cfg.eps on [0, cfg.series_t].
inline json run_series_check(const ExperimentConfig& cfg) {
  const std::filesystem::path dir(cfg.out_dir);
  return detail::with_error_report(dir, [&] {
    cfg.validate();
    const auto ic = SeriesIC::from_state(cfg.initial);
    json j;
    j["version"] = std::string(kVersion);
    j["command"] = "series-check";
    j["config"] = detail::config_json(cfg);
    j["order"] = cfg.series_order;
    j["t"] = cfg.series_t;
    std::vector<double> es, rs;
    for (double e : cfg.series_eps) {
      const Epsilon eps(e);
      const auto tr = integrate_to(cfg.initial, cfg.series_t, eps, cfg.integrator);
      const auto& f = tr.samples.back();
      const auto s = perturbative_xy(ic, eps, cfg.series_t, cfg.series_order);
      const double r = std::hypot(s.x - f.x, s.y - f.y);
      j["rows"].push_back({{"eps", e}, {"residual", r}});
      es.push_back(e);
      rs.push_back(r);
    }
    bool fit_ok = es.size() >= 2;
    for (double r : rs) fit_ok = fit_ok && r > 0.0;
    j["slope"] = fit_ok ? json(loglog_slope(es, rs)) : json(nullptr);
    if (cfg.initial.ydot != 0.0 && cfg.initial.y == 0.0) {
      j["loop_time"] = loop_time(ic, Epsilon(cfg.eps));
      const auto pts = iterate_poincare(cfg.initial, Epsilon(cfg.eps), 1, cfg.integrator);
      j["measured_first_return"] = pts[1].t;
    }

    const Epsilon eps(cfg.eps);
    const auto tr = integrate_to(cfg.initial, cfg.series_t, eps, cfg.integrator, cfg.sample_every);
    std::string csv = "t,x_num,x_series,y_num,y_series,res_x,res_y\n";
    for (const auto& s : tr.samples) {
      const auto p = perturbative_xy(ic, eps, s.t, cfg.series_order);
      csv += format_double(s.t) + ',' + format_double(s.x) + ',' + format_double(p.x) + ',' +
             format_double(s.y) + ',' + format_double(p.y) + ',' + format_double(p.x - s.x) + ',' +
             format_double(p.y - s.y) + '\n';
    }
    write_text_file(dir / "config.ini", serialize_config(cfg));
    write_text_file(dir / "series.csv", csv);
    write_text_file(dir / "series.json", j.dump(2) + "\n");
    return j;
  });
}

/// Predictions only, from the slow values of cfg.initial.
inline std::vector<std::vector<SlowPair>> run_predict(const ExperimentConfig& cfg) {
  const std::filesystem::path dir(cfg.out_dir);
  return detail::with_error_report(dir, [&] {
    cfg.validate();
    const Epsilon eps(cfg.eps);
    const double h = hamiltonian(cfg.initial, eps);
    const auto sv = slow_variables(cfg.initial, h);
    std::vector<std::vector<SlowPair>> out;
    json meta;
    meta["version"] = std::string(kVersion);
    meta["command"] = "predict";
    meta["config"] = detail::config_json(cfg);
    meta["h"] = h;
    meta["u0"] = sv.u;
    meta["w0"] = sv.w;
    meta["T0"] = sv.u * sv.u + sv.w * sv.w;
    meta["phi0"] = (sv.u != 0.0 || sv.w != 0.0) ? json(phase0(sv.u, sv.w)) : json(nullptr);
    if (cfg.eps > 0.0) {
      for (auto r : {Regime::series, Regime::P1, Regime::P2}) {
        meta["horizons"][std::string(to_string(r))] = validity_horizon(eps, r, cfg.horizon_c);
      }
    }
    for (auto mode : cfg.modes) {
      auto seq = predict_sequence({sv.u, sv.w, h, eps, mode}, cfg.crossings);
      write_text_file(dir / ("predictions_" + std::string(to_string(mode)) + ".csv"),
                      predictions_csv(seq, mode));
      out.push_back(std::move(seq));
    }
    write_text_file(dir / "config.ini", serialize_config(cfg));
    write_text_file(dir / "metadata.json", meta.dump(2) + "\n");
    return out;
  });
}

/// Section crossings only.
inline std::vector<SlowPoint> run_section(const ExperimentConfig& cfg) {
  const std::filesystem::path dir(cfg.out_dir);
  return detail::with_error_report(dir, [&] {
    cfg.validate();
    auto pts = sample_crossings(cfg);
    write_text_file(dir / "config.ini", serialize_config(cfg));
    write_text_file(dir / "slow_points.csv", slow_points_csv(pts));
    json meta;
    meta["version"] = std::string(kVersion);
    meta["command"] = "section";
    meta["config"] = detail::config_json(cfg);
    meta["crossings"] = pts.size() - 1;
    double worst = 0.0;
    for (const auto& p : pts) worst = std::max(worst, p.h_resid);
    meta["max_energy_residual"] = worst;
    if (pts.size() >= 2) {
      const auto qp = measure_quasi_period(pts);
      meta["quasi_period_mean"] = qp.mean;
      meta["quasi_period_max_deviation"] = qp.max_deviation;
    }
    try {
      const auto sp = measure_slow_period(pts);
      meta["slow_period_t"] = sp.period_t;
      meta["slow_period_n"] = sp.period_n;
    } catch (const ValidationError&) {
      meta["slow_period_t"] = nullptr;
      meta["slow_period_n"] = nullptr;
    }
    write_text_file(dir / "metadata.json", meta.dump(2) + "\n");
    if (cfg.plot) {
      std::vector<double> n, v, w;
      for (const auto& p : pts) {
        n.push_back(static_cast<double>(p.n));
        v.push_back(p.v);
        w.push_back(p.w);
      }
      const std::vector<PlotSeries> s{{"v_n", n, v, ""}, {"w_n", n, w, ""}};
      emit_plot(s, {"slow variables at crossings", "n", "v_n, w_n"}, dir / "slow_points.svg");
    }
    return pts;
  });
}

}  // namespace hhslow::harness
