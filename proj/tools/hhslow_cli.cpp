// Command-line front end for the slow-variable experiments.
//
//   hhslow compare --config configs/finalcomp.ini --out out/finalcomp --plot
//   hhslow sweep --config configs/eps_sweep.ini
//   hhslow predict --eps 0.01 --n 50000 --mode P2
//
// Exit codes: 0 success, 2 validation, 3 numeric quality, 4 I/O.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hhslow/harness/experiment.hpp"

namespace {

using namespace hhslow;
using namespace hhslow::harness;

struct CommonOptions {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::int64_t> n;
  std::optional<double> eps;
  std::optional<double> t_end;
  std::vector<std::string> modes;
  bool plot = false;
  std::optional<double> x0, y0, xdot0, ydot0;
  std::optional<std::string> method;
  std::optional<double> step;
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("--config", o.config_path, "Configuration file");
  app->add_option("--out", o.out, "Output directory");
  app->add_option("--n", o.n, "Number of section crossings");
  app->add_option("--eps", o.eps, "Perturbation parameter");
  app->add_option("--t-end", o.t_end, "Run until this time instead of a crossing count");
  app->add_option("--mode", o.modes, "Predictor mode(s)")
      ->check(CLI::IsMember({"P1", "P2", "P3"}));
  app->add_flag("--plot", o.plot, "Emit SVG plots");
  app->add_option("--x0", o.x0, "Initial x");
  app->add_option("--y0", o.y0, "Initial y");
  app->add_option("--xdot0", o.xdot0, "Initial xdot");
  app->add_option("--ydot0", o.ydot0, "Initial ydot");
  app->add_option("--method", o.method, "Integrator: splitting4, splitting6, splitting8, rk6");
  app->add_option("--step", o.step, "Integrator step size");
}

ExperimentConfig resolve(const CommonOptions& o) {
  ExperimentConfig c;
  if (!o.config_path.empty()) c = load_config(o.config_path);
  if (o.out) c.out_dir = *o.out;
  if (o.n) c.crossings = *o.n;
  if (o.eps) c.eps = *o.eps;
  if (o.t_end) c.t_end = *o.t_end;
  if (!o.modes.empty()) {
    c.modes.clear();
    for (const auto& m : o.modes) c.modes.push_back(parse_mode(m));
  }
  if (o.plot) c.plot = true;
  if (o.x0) c.initial.x = *o.x0;
  if (o.y0) c.initial.y = *o.y0;
  if (o.xdot0) c.initial.xdot = *o.xdot0;
  if (o.ydot0) c.initial.ydot = *o.ydot0;
  if (o.method) c.integrator.method = parse_method(*o.method);
  if (o.step) c.integrator.step_size = *o.step;
  c.validate();
  return c;
}

/// Regenerates SVGs from the CSV artifacts of a previous `compare` run.
void replot(const std::filesystem::path& dir, const std::vector<std::string>& modes) {
  const auto pts = parse_csv(read_text_file(dir / "slow_points.csv"));
  const auto n = pts.values("n");
  const auto v = pts.values("v");
  const auto u = pts.values("u");
  std::vector<std::string> ms = modes;
  if (ms.empty()) {
    for (const char* m : {"P1", "P2", "P3"}) {
      if (std::filesystem::exists(dir / ("predictions_" + std::string(m) + ".csv"))) ms.emplace_back(m);
    }
  }
  if (ms.empty()) {
    std::vector<PlotSeries> s{{"v_n", n, v, ""}};
    emit_plot(s, {"slow variables at crossings", "n", "v_n"}, dir / "slow_points.svg");
    std::printf("wrote %s\n", (dir / "slow_points.svg").string().c_str());
    return;
  }
  // h = u + v holds on every crossing; take it from the first row.
  const double h = u.at(0) + v.at(0);
  for (const auto& m : ms) {
    const auto pred = parse_csv(read_text_file(dir / ("predictions_" + m + ".csv")));
    std::vector<double> vp;
    for (double up : pred.values("u_pred")) vp.push_back(h - up);
    std::vector<PlotSeries> overlay{{"numeric", n, v, ""}, {m, pred.values("n"), vp, ""}};
    emit_plot(overlay, {"v_n: numeric vs " + m, "n", "v_n"}, dir / ("v_overlay_" + m + ".svg"));
    std::printf("wrote %s\n", (dir / ("v_overlay_" + m + ".svg")).string().c_str());
    const auto errs = parse_csv(read_text_file(dir / ("errors_" + m + ".csv")));
    auto en = errs.values("n");
    auto ev = errs.values("err_v");
    if (en.size() > 1) {
      en.erase(en.begin());
      ev.erase(ev.begin());
      std::vector<PlotSeries> err{{"max |v_num - v_" + m + "|", en, ev, ""}};
      emit_plot(err, {"prefix-max error, " + m, "n", "error"}, dir / ("errors_" + m + ".svg"));
      std::printf("wrote %s\n", (dir / ("errors_" + m + ".svg")).string().c_str());
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Slow-variable dynamics of the rescaled Henon-Heiles system"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(hhslow::kVersion));

  CommonOptions opts;
  std::vector<std::pair<std::string, CLI::App*>> subs;
  for (const auto& [name, help] : std::vector<std::pair<const char*, const char*>>{
           {"simulate", "Integrate a trajectory and record samples"},
           {"section", "Record section crossings and slow variables"},
           {"predict", "Evaluate the slow-map predictors"},
           {"compare", "Section crossings against predictors, with error series"},
           {"contour-check", "One-loop complex contour integration and residual scaling"},
           {"series-check", "Perturbation series against direct integration"},
           {"sweep", "Concurrent runs over sweep.eps"},
           {"plot", "Regenerate SVG plots from a compare output directory"}}) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub, opts);
    subs.emplace_back(name, sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(hhslow::ErrorKind::validation);
  }

  std::string cmd;
  for (const auto& [name, sub] : subs) {
    if (sub->parsed()) cmd = name;
  }

  try {
    if (cmd == "plot") {
      replot(opts.out.value_or("out"), opts.modes);
      return 0;
    }
    const auto cfg = resolve(opts);
    if (cmd == "simulate") {
      const auto r = run_simulation(cfg);
      std::printf("samples %zu  h0 %.17g  max |h - h0| %.3e\n", r.trajectory.samples.size(),
                  r.trajectory.h0, r.trajectory.max_drift);
    } else if (cmd == "section") {
      const auto pts = run_section(cfg);
      const auto& last = pts.back();
      std::printf("crossings %lld  t %.17g  v %.17g  w %.17g\n", static_cast<long long>(last.n),
                  last.t, last.v, last.w);
    } else if (cmd == "predict") {
      const auto seqs = run_predict(cfg);
      for (std::size_t i = 0; i < seqs.size(); ++i) {
        const auto& p = seqs[i].back();
        std::printf("%s  n %zu  u %.17g  w %.17g\n", std::string(to_string(cfg.modes[i])).c_str(),
                    seqs[i].size() - 1, p.u, p.w);
      }
    } else if (cmd == "compare") {
      const auto r = run_experiment(cfg);
      const double t0 = r.points.front().u * r.points.front().u + r.points.front().w * r.points.front().w;
      for (const auto& m : r.modes) {
        std::printf("%s  max|dv| %.3e  max|dw| %.3e  max|dv|/sqrt(T0) %.3e\n",
                    std::string(to_string(m.mode)).c_str(), m.comparison.summary.max_err_v,
                    m.comparison.summary.max_err_w,
                    t0 > 0.0 ? m.comparison.summary.max_err_v / std::sqrt(t0) : 0.0);
      }
    } else if (cmd == "contour-check") {
      const auto j = run_contour_check(cfg);
      std::printf("%s\n", j.dump(2).c_str());
    } else if (cmd == "series-check") {
      const auto j = run_series_check(cfg);
      std::printf("%s\n", j.dump(2).c_str());
    } else if (cmd == "sweep") {
      for (const auto& row : run_sweep(cfg)) {
        std::printf("eps %-8g crossings %-8lld slow speed %.6e\n", row.eps,
                    static_cast<long long>(row.crossings), row.slow_speed);
      }
    }
    std::printf("output: %s\n", cfg.out_dir.c_str());
    return 0;
  } catch (const hhslow::Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", e.code().c_str(), e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 1;
  }
}
