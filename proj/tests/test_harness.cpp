#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "hhslow/harness/experiment.hpp"

using namespace hhslow;
using namespace hhslow::harness;
namespace fs = std::filesystem;

namespace {

const PhaseState kFinalcomp{0.38729833462074168852, 0.0, 0.2, 0.1, 0.0};

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "hhslow_tests" / name;
  fs::remove_all(dir);
  return dir;
}

ExperimentConfig small_run(const fs::path& dir, double eps = 0.1, std::int64_t n = 200) {
  ExperimentConfig c;
  c.name = "small";
  c.initial = kFinalcomp;
  c.eps = eps;
  c.crossings = n;
  c.out_dir = dir.string();
  return c;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(HHSLOW_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, RoundTripsDefaults) {
  const ExperimentConfig c;
  EXPECT_EQ(parse_config(serialize_config(c)), c);
}

TEST(Config, RoundTripsEveryField) {
  ExperimentConfig c;
  c.name = "round_trip";
  c.initial = {0.1234567890123456789, 0.0, -1.0 / 3.0, 2.0 / 7.0, 0.0};
  c.eps = 0.0123456789;
  c.crossings = 123456;
  c.t_end = 1e3 / 7;
  c.sample_every = 5;
  c.seed = 18446744073709551615ull;
  c.integrator = {Method::rk6, 0.0123, 3e-11};
  c.modes = {PredictorMode::P3, PredictorMode::P1};
  c.horizon_c = 0.25;
  c.out_dir = "some/dir";
  c.plot = true;
  c.sweep_eps = {1.0, 0.2, 0.1};
  c.contour_nodes = 1024;
  c.contour_eps = {0.03};
  c.series_eps = {0.3, 0.15};
  c.series_t = 2.5;
  c.series_order = 1;
  const auto text = serialize_config(c);
  EXPECT_EQ(parse_config(text), c);
  EXPECT_EQ(serialize_config(parse_config(text)), text);
}

TEST(Config, SectionsCommentsAndDottedKeys) {
  const auto c = parse_config(
      "# leading comment\n"
      "[initial]\n"
      "x0 = 0.5   ; trailing comment\n"
      "ydot0 = 0.25\n"
      "model.eps = 0.02\n"
      "\n"
      "[predictor]\n"
      "modes = P2\n");
  EXPECT_EQ(c.initial.x, 0.5);
  EXPECT_EQ(c.initial.ydot, 0.25);
  EXPECT_EQ(c.eps, 0.02);
  ASSERT_EQ(c.modes.size(), 1u);
  EXPECT_EQ(c.modes[0], PredictorMode::P2);
}

TEST(Config, RejectsBadInput) {
  const auto code_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ValidationError& e) {
      return e.code();
    }
    return std::string("none");
  };
  EXPECT_EQ(code_of("run.bogus = 1\n"), "invalid_config");
  EXPECT_EQ(code_of("model.eps = abc\n"), "invalid_config");
  EXPECT_EQ(code_of("model.eps = -0.1\n"), "invalid_epsilon");
  EXPECT_EQ(code_of("run.crossings = 1.5\n"), "invalid_config");
  EXPECT_EQ(code_of("[run\n"), "invalid_config");
  EXPECT_EQ(code_of("just text\n"), "invalid_config");
  EXPECT_EQ(code_of("predictor.modes = P7\n"), "invalid_mode");
  EXPECT_EQ(code_of("output.plot = maybe\n"), "invalid_config");
  EXPECT_EQ(code_of("series.order = 3\n"), "invalid_config");
  EXPECT_THROW(load_config("/nonexistent/config.ini"), IoError);
}

TEST(Config, SampleConfigsParse) {
  for (const auto& entry : fs::directory_iterator(HHSLOW_CONFIG_DIR)) {
    if (entry.path().extension() != ".ini") continue;
    SCOPED_TRACE(entry.path().string());
    const auto c = load_config(entry.path().string());
    EXPECT_EQ(parse_config(serialize_config(c)), c);
  }
}

TEST(Compare, IdenticalInputsGiveZeros) {
  std::vector<SlowPoint> pts;
  std::vector<SlowPair> pred;
  for (int n = 0; n < 10; ++n) {
    pts.push_back({n, 6.3 * n, 0.01 + 1e-4 * n, 0.02, 0.09 - 1e-4 * n, 0.0});
    pred.push_back({0.09 - 1e-4 * n, 0.02});
  }
  const auto c = compare(pts, pred, PredictorMode::P2, Epsilon(0.1));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_EQ(c.series.err_v[i], 0.0);
    EXPECT_EQ(c.series.err_w[i], 0.0);
  }
  EXPECT_EQ(c.summary.max_err_v, 0.0);
  ASSERT_EQ(c.summary.at_horizons.size(), 3u);
  EXPECT_EQ(c.summary.at_horizons[0].horizon, 50);
  EXPECT_EQ(c.summary.at_horizons[0].n, 9);
}

TEST(Compare, PrefixMaximumIsNondecreasing) {
  std::vector<SlowPoint> pts;
  std::vector<SlowPair> pred;
  for (int n = 0; n < 50; ++n) {
    pts.push_back({n, 0.0, 0.0, std::sin(n), -std::cos(0.3 * n), 0.0});
    pred.push_back({0.0, 0.0});
  }
  const auto c = compare(pts, pred, PredictorMode::P1, Epsilon(0.0));
  for (std::size_t i = 1; i < pts.size(); ++i) {
    EXPECT_GE(c.series.err_v[i], c.series.err_v[i - 1]);
    EXPECT_GE(c.series.err_w[i], c.series.err_w[i - 1]);
  }
  EXPECT_TRUE(c.summary.at_horizons.empty());
}

TEST(Compare, LengthMismatchRejected) {
  std::vector<SlowPoint> pts(3);
  std::vector<SlowPair> pred(4);
  try {
    compare(pts, pred, PredictorMode::P2, Epsilon(0.1));
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.code(), "length_mismatch");
  }
}

TEST(Experiment, UncoupledErrorSeriesVanish) {
  const auto dir = scratch_dir("uncoupled");
  const auto r = run_experiment(small_run(dir, 0.0, 300));
  for (const auto& m : r.modes) {
    EXPECT_LE(m.comparison.summary.max_err_v, 1e-14) << to_string(m.mode);
    EXPECT_LE(m.comparison.summary.max_err_w, 1e-14) << to_string(m.mode);
  }
}

TEST(Experiment, WritesAllArtifacts) {
  const auto dir = scratch_dir("artifacts");
  auto cfg = small_run(dir);
  cfg.plot = true;
  run_experiment(cfg);
  for (const char* f : {"config.ini", "metadata.json", "slow_points.csv", "predictions_P1.csv",
                        "predictions_P2.csv", "predictions_P3.csv", "errors_P1.csv",
                        "errors_P2.csv", "errors_P3.csv", "v_overlay_P2.svg", "errors_P2.svg"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  EXPECT_EQ(load_config((dir / "config.ini").string()), cfg);
  const auto meta = json::parse(read_text_file(dir / "metadata.json"));
  EXPECT_EQ(meta["version"], std::string(kVersion));
  EXPECT_NEAR(meta["h0"].get<double>(), 0.1, 1e-16);
  EXPECT_NEAR(meta["T0"].get<double>(), 0.0085, 1e-17);
  EXPECT_EQ(meta["horizons"]["series"], 50);
  EXPECT_EQ(meta["crossings"], 200);

  const auto pts = parse_csv(read_text_file(dir / "slow_points.csv"));
  EXPECT_EQ(pts.rows.size(), 201u);
  EXPECT_EQ(pts.values("v")[0], 0.010000000000000002);
  const auto errs = parse_csv(read_text_file(dir / "errors_P2.csv"));
  EXPECT_EQ(errs.header, (std::vector<std::string>{"n", "err_v", "err_w", "mode"}));
}

TEST(Experiment, OverlayUsesBlueNumericRedPredicted) {
  const auto dir = scratch_dir("overlay");
  auto cfg = small_run(dir);
  cfg.plot = true;
  cfg.modes = {PredictorMode::P2};
  run_experiment(cfg);
  const auto svg = read_text_file(dir / "v_overlay_P2.svg");
  const auto blue = svg.find("stroke=\"#1f4fbf\" stroke-width=\"1.2\"");
  const auto red = svg.find("stroke=\"#d62728\" stroke-width=\"1.2\"");
  ASSERT_NE(blue, std::string::npos);
  ASSERT_NE(red, std::string::npos);
  EXPECT_LT(blue, red);
  EXPECT_NE(svg.find(">numeric</text>"), std::string::npos);
  EXPECT_NE(svg.find(">n</text>"), std::string::npos);
}

TEST(Experiment, ReproducibleOutputs) {
  const auto a = scratch_dir("repro_a");
  const auto b = scratch_dir("repro_b");
  run_experiment(small_run(a));
  run_experiment(small_run(b));
  for (const char* f : {"slow_points.csv", "predictions_P1.csv", "predictions_P2.csv",
                        "predictions_P3.csv", "errors_P1.csv", "errors_P2.csv", "errors_P3.csv"}) {
    EXPECT_EQ(read_text_file(a / f), read_text_file(b / f)) << f;
  }
}

TEST(Experiment, TimeLimitedRun) {
  const auto dir = scratch_dir("t_end");
  auto cfg = small_run(dir);
  cfg.t_end = 100.0;
  const auto r = run_experiment(cfg);
  EXPECT_EQ(r.points.size(), 16u);
  EXPECT_LE(r.points.back().t, 100.0);
}

TEST(Experiment, FailureWritesErrorReport) {
  const auto dir = scratch_dir("failure");
  auto cfg = small_run(dir);
  cfg.initial.y = 0.2;
  EXPECT_THROW(run_experiment(cfg), ValidationError);
  const auto err = json::parse(read_text_file(dir / "error.json"));
  EXPECT_EQ(err["kind"], "validation");
  EXPECT_EQ(err["code"], "not_on_section");
  EXPECT_EQ(err["exit_code"], 2);

  auto drift = small_run(dir);
  drift.integrator = {Method::splitting4, 0.5, 1e-12};
  EXPECT_THROW(run_experiment(drift), DriftError);
  const auto err2 = json::parse(read_text_file(dir / "error.json"));
  EXPECT_EQ(err2["kind"], "numeric_quality");
  EXPECT_EQ(err2["code"], "drift_exceeded");
  EXPECT_GT(err2["drift"].get<double>(), 1e-12);
}

TEST(Experiment, P1WithinToleranceOverItsHorizon) {
  // n eps^(5/2) = 0.5 at eps = 0.01, n = 5e4.
  const auto dir = scratch_dir("p1_horizon");
  auto cfg = small_run(dir, 0.01, 50000);
  cfg.modes = {PredictorMode::P1};
  const auto r = run_experiment(cfg);
  EXPECT_LE(r.modes[0].comparison.summary.max_err_v, 0.05 * std::sqrt(0.0085));
  EXPECT_LE(r.modes[0].comparison.summary.max_err_w, 0.05 * std::sqrt(0.0085));
}

TEST(Sweep, SlowSpeedDecreasesWithEps) {
  const auto dir = scratch_dir("sweep");
  ExperimentConfig cfg;
  cfg.name = "sweep";
  cfg.initial = {0.1, 0.0, 0.08, 0.1, 0.0};
  cfg.t_end = 1000.0;
  cfg.sweep_eps = {1.0, 0.2, 0.1};
  cfg.out_dir = dir.string();
  const auto rows = run_sweep(cfg);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].eps, 1.0);
  EXPECT_EQ(rows[1].eps, 0.2);
  EXPECT_EQ(rows[2].eps, 0.1);
  EXPECT_GT(rows[0].slow_speed, rows[1].slow_speed);
  EXPECT_GT(rows[1].slow_speed, rows[2].slow_speed);
  const auto table = parse_csv(read_text_file(dir / "sweep.csv"));
  EXPECT_EQ(table.values("eps"), (std::vector<double>{1.0, 0.2, 0.1}));
  EXPECT_TRUE(fs::exists(dir / "eps_0.2" / "slow_points.csv"));
  const auto meta = json::parse(read_text_file(dir / "metadata.json"));
  EXPECT_EQ(meta["slow_speed_monotone_in_eps"], true);
}

TEST(Checks, ContourAndSeriesReports) {
  const auto dir = scratch_dir("checks");
  auto cfg = small_run(dir, 0.01);
  const auto c = run_contour_check(cfg);
  EXPECT_LT(std::abs(c["section_check"]["diff_v"].get<double>()), 1e-8);
  EXPECT_LT(std::abs(c["section_check"]["diff_w"].get<double>()), 1e-8);
  EXPECT_TRUE(fs::exists(dir / "contour.json"));
  cfg.initial = {0.1, 0.0, 0.08, 0.1, 0.0};
  const auto s = run_series_check(cfg);
  EXPECT_NEAR(s["slope"].get<double>(), 3.0, 0.3);
  EXPECT_TRUE(fs::exists(dir / "series.csv"));
}

TEST(Plot, RejectsEmptyAndMismatchedSeries) {
  EXPECT_THROW(render_svg({}, {}), ValidationError);
  const std::vector<PlotSeries> empty{{"a", {}, {}, ""}};
  EXPECT_THROW(render_svg(empty, {}), ValidationError);
  const std::vector<PlotSeries> bad{{"a", {1.0, 2.0}, {1.0}, ""}};
  EXPECT_THROW(render_svg(bad, {}), ValidationError);
}

TEST(Plot, StandaloneSvgWithAxesAndLegend) {
  std::vector<double> x, y;
  for (int i = 0; i < 20000; ++i) {
    x.push_back(i);
    y.push_back(std::sin(0.01 * i));
  }
  const std::vector<PlotSeries> s{{"sin <x>", x, y, ""}};
  const auto svg = render_svg(s, {"title & more", "n", "v_n"});
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("sin &lt;x&gt;"), std::string::npos);
  EXPECT_NE(svg.find("title &amp; more"), std::string::npos);
  // Decimated: far fewer vertices than samples.
  EXPECT_LT(svg.size(), 200000u);
  const auto dir = scratch_dir("plot");
  emit_plot(s, {}, dir / "p.svg");
  EXPECT_TRUE(fs::exists(dir / "p.svg"));
  EXPECT_THROW(emit_plot(s, {}, "/proc/forbidden/p.svg"), IoError);
}

TEST(Csv, ParsesNumbersAndText) {
  const auto t = parse_csv("a,b,mode\n1,2.5,P2\n-3e-4,inf,P1\n");
  EXPECT_EQ(t.values("a"), (std::vector<double>{1.0, -3e-4}));
  EXPECT_TRUE(std::isnan(t.values("mode")[0]));
  EXPECT_THROW(t.column("zzz"), ValidationError);
  EXPECT_THROW(parse_csv(""), ValidationError);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch_dir("cli");
  const std::string out = " --out " + dir.string();
  const std::string ic = " --x0 0.3872983346207417 --xdot0 0.2 --ydot0 0.1";
  EXPECT_EQ(run_cli("compare --eps 0.1 --n 20" + ic + out), 0);
  EXPECT_TRUE(fs::exists(dir / "slow_points.csv"));
  EXPECT_EQ(run_cli("plot --mode P2" + out), 0);
  EXPECT_TRUE(fs::exists(dir / "v_overlay_P2.svg"));
  EXPECT_EQ(run_cli("predict --eps -1" + out), 2);
  EXPECT_EQ(run_cli("section --eps 0.1 --y0 0.3 --ydot0 0.1" + out), 2);
  EXPECT_EQ(run_cli("compare --mode P9" + out), 2);
  EXPECT_EQ(run_cli("nosuchcommand"), 2);
  EXPECT_EQ(run_cli("simulate --config /nonexistent.ini" + out), 4);
  EXPECT_EQ(run_cli("simulate --eps 0.1 --n 3 --method splitting4 --step 0.5" + ic + out), 3);
  EXPECT_EQ(run_cli("simulate --eps 0.1 --n 3" + ic + " --out /proc/forbidden"), 4);
  EXPECT_EQ(run_cli("section --config " + std::string(HHSLOW_CONFIG_DIR) +
                    "/slow_period.ini --n 10" + out),
            0);
}
