#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "hhslow/contour.hpp"
#include "hhslow/section.hpp"
#include "hhslow/stats.hpp"

using namespace hhslow;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Params {
  double v0, w0, h;
};

// Generic starting points, well away from cancellations in the remainder.
const Params kGeneric[] = {{0.05, 0.02, 0.1}, {0.1, 0.05, 0.1}, {0.03, -0.02, 0.1}};

ContourState start_state(double v0, double w0, double h, double x_sign) {
  const double rr = 2 * h * v0 - v0 * v0 - w0 * w0;
  ContourState s;
  s.y = 0.0;
  s.v = v0;
  s.w = w0;
  s.branch.sqrt_q = std::sqrt(v0);
  s.branch.sqrt_s = x_sign * std::sqrt(rr);
  return s;
}

/// sqrt(v0 - y^2) on the branch nearest the tracked sqrt(v - y^2).
cplx sqrt_q0(double v0, const ContourState& s) {
  const cplx r = std::sqrt(cplx(v0) - s.y * s.y);
  return std::abs(r - s.branch.sqrt_q) <= std::abs(r + s.branch.sqrt_q) ? r : -r;
}

}  // namespace

TEST(ContourGeometry, TwoCirclesThroughOrigin) {
  const Contour c(0.04, 64);
  const auto nodes = c.nodes();
  ASSERT_EQ(nodes.size(), 129u);
  EXPECT_NEAR(std::abs(nodes.front()), 0.0, 1e-16);
  EXPECT_NEAR(std::abs(nodes[64]), 0.0, 1e-16);
  EXPECT_NEAR(std::abs(nodes.back()), 0.0, 1e-16);
  EXPECT_NEAR(nodes[32].real(), 0.4, 1e-15);   // far side of the right circle
  EXPECT_NEAR(nodes[96].real(), -0.4, 1e-15);  // far side of the left circle
  EXPECT_NEAR(c.step(), kTwoPi / 64, 1e-16);
  EXPECT_THROW(Contour(0.0), ValidationError);
  EXPECT_THROW(Contour(0.01, 8), ValidationError);
}

TEST(XOfY, StartValueIsSectionState) {
  for (double xs : {1.0, -1.0}) {
    const auto st = start_state(0.01, 0.02, 0.1, xs);
    const auto xe = x_of_y(st, Epsilon(0.05));
    const auto ref = state_from_slow(0.01, 0.02, 0.1, xs);
    EXPECT_NEAR(xe.x.real(), ref.x, 1e-15);
    EXPECT_NEAR(xe.x.imag(), 0.0, 1e-18);
    EXPECT_NEAR(xe.xdot.real(), ref.xdot, 1e-15);
  }
}

TEST(XOfY, UncoupledEnergySplit) {
  const double v0 = 0.01, w0 = 0.02, h = 0.1;
  const double rr = 2 * h * v0 - v0 * v0 - w0 * w0;
  for (double y : {-0.09, -0.05, 0.0, 0.03, 0.0999}) {
    ContourState s;
    s.y = y;
    s.v = v0;
    s.w = w0;
    s.branch.sqrt_q = std::sqrt(v0 - y * y);
    s.branch.sqrt_s = std::sqrt(rr);
    const auto xe = x_of_y(s, Epsilon(0.0));
    EXPECT_NEAR(xe.x.imag(), 0.0, 1e-15);
    EXPECT_NEAR(std::norm(xe.x) + std::norm(xe.xdot), 2 * h - v0, 1e-14) << y;
  }
}

TEST(ContourLoop, UncoupledLoopIsIdentity) {
  const auto r = integrate_contour(0.01, 0.02, 0.1, Epsilon(0.0));
  EXPECT_NEAR(r.v1, 0.01, 1e-10);
  EXPECT_NEAR(r.w1, 0.02, 1e-10);
  EXPECT_NEAR(r.t1, kTwoPi, 1e-10);
  EXPECT_NEAR(r.diagnostics.winding_q, 4 * std::numbers::pi, 1e-9);
  EXPECT_TRUE(r.diagnostics.sqrt_q_returned);
  EXPECT_LT(r.diagnostics.imag_residual, 1e-12);
  EXPECT_EQ(r.diagnostics.nodes, 2 * Contour::kDefaultNodes);
}

TEST(ContourLoop, MatchesReferenceFirstReturn) {
  // 40-digit real-time integration of the same loop.
  const auto r = integrate_contour(0.01, 0.02, 0.1, Epsilon(0.01));
  EXPECT_NEAR(r.v1, 0.010001155033055439975, 1e-13);
  EXPECT_NEAR(r.w1, 0.020005110429911714776, 1e-13);
  EXPECT_NEAR(r.t1, 6.2831283825535416211, 1e-11);
  EXPECT_LT(r.diagnostics.x_closure, 1e-10);
}

TEST(ContourLoop, LeadingIncrement) {
  const auto lead = loop_one_leading(0.01, 0.02, 0.1, Epsilon(0.01));
  // eps^2 (14 pi / 3) w0 r0 with r0 = 0.0387298
  EXPECT_NEAR(lead.dv, 1.13562e-6, 1e-11);
  const auto r = integrate_contour(0.01, 0.02, 0.1, Epsilon(0.01));
  EXPECT_NEAR(r.v1 - 0.01, lead.dv, 1e-6 * 0.1);  // remainder is O(eps^3)
  const auto zero = loop_one_leading(0.1, 0.0, 0.1, Epsilon(0.01));
  EXPECT_EQ(zero.dv, 0.0);
  EXPECT_EQ(zero.dw, 0.0);
}

TEST(ContourLoop, ReturnTimeDeviationScalesAsEpsSquared) {
  std::vector<double> es, dt;
  for (double e : {0.04, 0.02, 0.01}) {
    es.push_back(e);
    dt.push_back(std::abs(integrate_contour(0.01, 0.02, 0.1, Epsilon(e)).t1 - kTwoPi));
  }
  EXPECT_NEAR(loglog_slope(es, dt), 2.0, 0.1);
}

TEST(ContourLoop, RemainderIsThirdOrder) {
  const std::vector<double> es{0.02, 0.01, 0.005};
  for (const auto& p : kGeneric) {
    const auto tab = one_loop_increment_check(p.v0, p.w0, p.h, es);
    EXPECT_GE(tab.slope_v, 2.7) << p.v0 << "," << p.w0;
    EXPECT_GE(tab.slope_w, 2.7) << p.v0 << "," << p.w0;
  }
  // At (0.01, 0.02, 0.1) the w remainder has competing eps^3 and eps^4 terms;
  // the eps^3-normalized residual still stays bounded.
  const auto tab = one_loop_increment_check(0.01, 0.02, 0.1, es);
  for (const auto& r : tab.rows) {
    EXPECT_LT(std::abs(r.r_v) / std::pow(r.eps, 3), 1.0);
    EXPECT_LT(std::abs(r.r_w) / std::pow(r.eps, 3), 1.0);
  }
}

TEST(ContourLoop, AgreesWithSectionMap) {
  for (const auto& p : kGeneric) {
    for (double xs : {1.0, -1.0}) {
      ContourOptions o;
      o.x_sign = xs;
      const auto c = integrate_contour(p.v0, p.w0, p.h, Epsilon(0.01), o);
      const auto pts =
          iterate_poincare(state_from_slow(p.v0, p.w0, p.h, xs), Epsilon(0.01), 1, {});
      EXPECT_NEAR(c.v1, pts[1].v, 1e-8);
      EXPECT_NEAR(c.w1, pts[1].w, 1e-8);
      EXPECT_NEAR(c.t1, pts[1].t, 1e-8);
    }
  }
}

TEST(ContourLoop, IteratedLoopsTrackSection) {
  const auto loops = iterate_contour(0.01, 0.02, 0.1, Epsilon(0.05), 20, {}, true);
  const auto pts = iterate_poincare(state_from_slow(0.01, 0.02, 0.1), Epsilon(0.05), 20, {});
  ASSERT_EQ(loops.size(), 21u);
  EXPECT_NEAR(loops[20].v, pts[20].v, 1e-10);
  EXPECT_NEAR(loops[20].w, pts[20].w, 1e-10);
  EXPECT_NEAR(loops[20].t, pts[20].t, 1e-8);
  EXPECT_THROW(iterate_contour(0.01, 0.02, 0.1, Epsilon(0.05), -1), ValidationError);
}

TEST(ContourLoop, CoarseGridReportsBranchJump) {
  ContourOptions o;
  o.nodes_per_circle = 64;
  try {
    integrate_contour(0.01, 0.02, 0.1, Epsilon(0.1), o);
    FAIL() << "expected a branch jump";
  } catch (const BranchJumpError& e) {
    EXPECT_EQ(e.exit_code(), 3);
    EXPECT_EQ(e.code(), "branch_jump");
  }
  o.nodes_per_circle = 4096;
  EXPECT_NO_THROW(integrate_contour(0.01, 0.02, 0.1, Epsilon(0.1), o));
}

TEST(ContourLoop, RejectsOutsideDomain) {
  EXPECT_THROW(integrate_contour(0.01, 0.2, 0.1, Epsilon(0.01)), DomainError);
  EXPECT_THROW(integrate_contour(0.0, 0.0, 0.1, Epsilon(0.01)), DomainError);
}

TEST(FirstOrder, VanishesAtStartAndAfterLoop) {
  const double v0 = 0.05, w0 = 0.02, h = 0.1;
  const auto f0 = first_order_slow(v0, w0, h, 0.0, std::sqrt(v0));
  EXPECT_LT(std::abs(f0.v1), 1e-16);
  EXPECT_LT(std::abs(f0.w1), 1e-16);
  // After the loop sqrt(v0 - y^2) has turned twice and is back at +sqrt(v0).
  ContourOptions o;
  o.record_path = true;
  const auto r = integrate_contour(v0, w0, h, Epsilon(0.01), o);
  const auto& end = r.path.back();
  ASSERT_TRUE(r.diagnostics.sqrt_q_returned);
  EXPECT_GT(sqrt_q0(v0, end).real(), 0.0);
  const auto f1 = first_order_slow(v0, w0, h, end.y, sqrt_q0(v0, end));
  EXPECT_LT(std::abs(f1.v1), 1e-12);
  EXPECT_LT(std::abs(f1.w1), 1e-12);
  EXPECT_THROW(first_order_slow(v0, w0, h, 0.1, std::sqrt(v0)), ValidationError);
}

TEST(FirstOrder, PointwiseLimitAlongQuarterCircle) {
  const double v0 = 0.05, w0 = 0.02, h = 0.1;
  std::vector<double> es{0.02, 0.01, 0.005}, rv, rw;
  for (double e : es) {
    ContourOptions o;
    o.record_path = true;
    const auto r = integrate_contour(v0, w0, h, Epsilon(e), o);
    double mv = 0.0, mw = 0.0;
    for (int k = 0; k <= o.nodes_per_circle / 4; ++k) {
      const auto& s = r.path[static_cast<std::size_t>(k)];
      const auto f = first_order_slow(v0, w0, h, s.y, sqrt_q0(v0, s));
      mv = std::max(mv, std::abs((s.v - v0) / e - f.v1));
      mw = std::max(mw, std::abs((s.w - w0) / e - f.w1));
    }
    rv.push_back(mv);
    rw.push_back(mw);
  }
  EXPECT_NEAR(loglog_slope(es, rv), 1.0, 0.15);
  EXPECT_NEAR(loglog_slope(es, rw), 1.0, 0.15);
}
