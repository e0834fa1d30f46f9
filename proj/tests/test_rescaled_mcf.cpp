#include <gtest/gtest.h>

#include <cmath>

#include "lojlab/errors.hpp"
#include "lojlab/rescaled_mcf.hpp"

using namespace lojlab;
using namespace lojlab::mcf;
using cyl::CylinderSpec;

namespace {

const CylinderSpec kSpec = CylinderSpec::make(1);

FlowHistory run(const CylinderGraph& g, double t_end, double stop_dist = 0.0) {
  Controls c;
  c.t_end = t_end;
  c.stop_dist = stop_dist;
  return evolve(FlowState{g, 0.0}, c);
}

double drop_sum(const std::vector<double>& v) {
  double s = 0.0;
  for (std::size_t j = 0; j + 1 < v.size(); ++j) s += v[j] - v[j + 1];
  return s;
}

}  // namespace

TEST(Profiles, ParseNames) {
  for (auto k : {ProfileKind::Zero, ProfileKind::Bump, ProfileKind::StableBump, ProfileKind::RandomBump}) {
    EXPECT_EQ(parse_profile_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_profile_kind("sphere"), InvalidInputError);
}

TEST(Profiles, AmplitudeAndPinning) {
  for (auto k : {ProfileKind::Bump, ProfileKind::StableBump, ProfileKind::RandomBump}) {
    const auto g = make_profile(kSpec, 10.0, 0.1, {k, 0.02, 9});
    double m = 0.0;
    for (double v : g.u()) m = std::max(m, std::abs(v));
    EXPECT_NEAR(m, 0.02, 1e-15) << to_string(k);
    EXPECT_EQ(g.u().front(), 0.0);
    EXPECT_EQ(g.u().back(), 0.0);
  }
  EXPECT_THROW(make_profile(kSpec, 10.0, 0.1, {ProfileKind::Bump, -1.0, 1}), InvalidInputError);
}

TEST(Spectrum, MatchesHermiteEigenvalues) {
  // u'' - (z/2) u' + u has eigenvalues 1 - m/2 with Hermite eigenfunctions.
  const CylinderGraph g(kSpec, 20.0, 0.05);
  const auto ev = linearized_spectrum(g, 5);
  ASSERT_EQ(ev.size(), 5u);
  for (std::size_t m = 0; m < 5; ++m) EXPECT_NEAR(ev[m], 1.0 - 0.5 * static_cast<double>(m), 2e-3) << m;
  EXPECT_THROW(linearized_spectrum(g, 0), InvalidInputError);
}

TEST(Profiles, StableBumpHasNoUnstableComponent) {
  for (auto k : {ProfileKind::StableBump, ProfileKind::RandomBump}) {
    const auto g = make_profile(kSpec, 20.0, 0.05, {k, 0.01, 4});
    const auto coef = modal_coefficients(g, 5);
    for (std::size_t m = 0; m < 3; ++m) EXPECT_LT(std::abs(coef[m]), 1e-12) << m;
    // Stable modes survive; even profiles only see the even one.
    EXPECT_GT(std::max(std::abs(coef[3]), std::abs(coef[4])), 1e-6);
  }
  const auto plain = make_profile(kSpec, 20.0, 0.05, {ProfileKind::Bump, 0.01, 1});
  EXPECT_GT(std::abs(modal_coefficients(plain, 1)[0]), 1e-4);
}

TEST(Evolve, CylinderIsStationary) {
  const CylinderGraph g(kSpec, 10.0, 0.1);
  for (double v : rhs(g)) EXPECT_EQ(v, 0.0);
  const auto h = run(g, 3.0);
  EXPECT_EQ(h.exit, ExitReason::Completed);
  EXPECT_EQ(h.states.size(), 13u);
  for (std::size_t i = 0; i < h.states.size(); ++i) {
    EXPECT_NEAR(h.states[i].t, 0.25 * static_cast<double>(i), 1e-12);
    EXPECT_EQ(h.F_series[i], h.F_cylinder);
    for (double v : h.states[i].graph.u()) ASSERT_EQ(v, 0.0);
  }
  EXPECT_NEAR(h.F_cylinder, kSpec.F_value, 1e-12);
  ASSERT_TRUE(h.index_at(2.0).has_value());
  EXPECT_FALSE(h.index_at(2.1).has_value());
  EXPECT_DOUBLE_EQ(h.t_last(), 3.0);
}

TEST(Evolve, AreaIsNonIncreasing) {
  const auto g = make_profile(kSpec, 10.0, 0.1, {ProfileKind::Bump, 0.05, 1});
  const auto h = run(g, 4.0);
  ASSERT_EQ(h.exit, ExitReason::Completed);
  for (std::size_t i = 0; i + 1 < h.F_series.size(); ++i) {
    EXPECT_LE(h.F_series[i + 1], h.F_series[i] + 1e-13) << h.states[i].t;
  }
  for (const auto& s : h.steps) EXPECT_LE(s.cfl, 1.0 + 1e-9);
}

TEST(Evolve, SpatialConvergenceIsSecondOrder) {
  auto u_at_zero = [](double h) {
    const auto g = CylinderGraph::from_profile(kSpec, 10.0, h, [](double z) { return 0.05 * std::exp(-z * z); });
    Controls c;
    c.t_end = 0.5;
    c.tol = 1e-11;
    const auto hist = evolve(FlowState{g, 0.0}, c);
    const auto& last = hist.states.back().graph;
    return last.u()[last.size() / 2];
  };
  const double a = u_at_zero(0.2), b = u_at_zero(0.1), c = u_at_zero(0.05);
  const double order = std::log2(std::abs(a - b) / std::abs(b - c));
  EXPECT_GT(order, 1.8);
  EXPECT_LT(order, 2.3);
}

TEST(Evolve, StopsWhenFarFromCylinder) {
  const auto g = make_profile(kSpec, 20.0, 0.05, {ProfileKind::Bump, 0.3, 1});
  const auto h = run(g, 10.0, 1.0);
  EXPECT_EQ(h.exit, ExitReason::DistanceExceeded);
  EXPECT_LT(h.t_last(), 10.0);
  EXPECT_GT(cyl::dist_R(h.states.back().graph, 5.0).dist, 1.0);
}

TEST(Evolve, NeckPinchIsReported) {
  // Radius sqrt(2) - 1.35 at z = 0: the neck collapses.
  const auto g = CylinderGraph::from_profile(kSpec, 10.0, 0.1, [](double z) { return -1.35 * std::exp(-z * z); });
  bool stopped = false;
  try {
    const auto h = run(g, 5.0);
    stopped = h.exit == ExitReason::GeometryFailure;
    EXPECT_FALSE(h.exit_detail.empty());
  } catch (const BlowUpError& e) {
    stopped = true;
    EXPECT_NO_THROW(e.last_valid().graph.validate());
  }
  EXPECT_TRUE(stopped);
}

TEST(Evolve, BadControls) {
  const CylinderGraph g(kSpec, 10.0, 0.1);
  Controls c;
  c.stride = 0.3;
  EXPECT_THROW(evolve(FlowState{g, 0.0}, c), InvalidInputError);
  c.stride = 0.25;
  c.dt_max = 0.0;
  EXPECT_THROW(evolve(FlowState{g, 0.0}, c), InvalidInputError);
  EXPECT_THROW(step(FlowState{g, 0.0}, 0.0), InvalidInputError);
  CylinderGraph bad(kSpec, 10.0, 0.1);
  bad.u_mut()[50] = -2.0;
  EXPECT_THROW(evolve(FlowState{bad, 0.0}, Controls{}), GeometryError);
  EXPECT_THROW(rhs(bad), GeometryError);
}

TEST(Fit, FlatFlowNeedsNoConstant) {
  const auto h = run(CylinderGraph(kSpec, 10.0, 0.1), 8.0);
  const auto fit = lojasiewicz_fit(h, FitOptions{});
  EXPECT_EQ(fit.windows.size(), 7u);
  EXPECT_EQ(fit.C, 0.0);
  EXPECT_FALSE(fit.cap_exceeded);
  for (const auto& w : fit.windows) EXPECT_EQ(w.slack, 0.0);
}

TEST(Fit, TooShortFlow) {
  const auto h = run(CylinderGraph(kSpec, 10.0, 0.1), 3.0);
  EXPECT_THROW(lojasiewicz_fit(h, FitOptions{}), InsufficientDataError);
}

TEST(Fit, SlackIsNonNegative) {
  const auto g = make_profile(kSpec, 10.0, 0.1, {ProfileKind::StableBump, 0.01, 1});
  const auto h = run(g, 8.0);
  const auto fit = lojasiewicz_fit(h, FitOptions{});
  EXPECT_GT(fit.C, 0.0);
  EXPECT_LE(fit.C, FitOptions{}.C_cap);
  EXPECT_GE(fit.tau_certified, 1.0 / 3.0);
  for (const auto& w : fit.windows) EXPECT_GE(w.slack, 0.0) << w.t;
}

TEST(Split, CrossingReconstructsTotalDrop) {
  const std::vector<double> x{3.0, 1.0, -0.5, -2.0};
  const auto s = split_cases(x);
  EXPECT_EQ(s.tag, flows::BoundCase::Crossing);
  EXPECT_EQ(s.above, (std::vector<double>{3.0, 1.0}));
  EXPECT_EQ(s.below, (std::vector<double>{2.0, 0.5}));
  // Drops within each part plus the two terminal steps to zero.
  const double total = drop_sum(s.above) + s.above.back() + s.below.back() + drop_sum(s.below);
  EXPECT_DOUBLE_EQ(total, x.front() - x.back());
}

TEST(Split, OneSidedCases) {
  auto a = split_cases({0.3, 0.2, 0.0});
  EXPECT_EQ(a.tag, flows::BoundCase::Above);
  EXPECT_EQ(a.above.size(), 2u);
  EXPECT_TRUE(a.below.empty());
  auto b = split_cases({0.0, -0.1, -0.4});
  EXPECT_EQ(b.tag, flows::BoundCase::Below);
  EXPECT_EQ(b.below, (std::vector<double>{0.4, 0.1}));
  EXPECT_THROW(split_cases({}), InvalidInputError);
  EXPECT_THROW(split_cases({0.1, 0.2}), InvalidInputError);
}

TEST(Close, CylinderSatisfiesEverything) {
  CloseConfig cfg;
  cfg.R_dom = 10.0;
  cfg.h = 0.1;
  cfg.profile = {ProfileKind::Zero, 0.0, 1};
  cfg.t2 = 8.0;
  const auto r = close_experiment(cfg);
  EXPECT_TRUE(r.hypotheses_ok);
  EXPECT_EQ(r.exit, ExitReason::Completed);
  EXPECT_EQ(r.sequence.size(), 4u);
  EXPECT_EQ(r.max_dist, 0.0);
  EXPECT_EQ(r.sqrt_sum, 0.0);
  EXPECT_TRUE(r.bound_holds);
}

TEST(Close, SmallStableBump) {
  CloseConfig cfg;
  cfg.R_dom = 10.0;
  cfg.h = 0.1;
  cfg.profile = {ProfileKind::StableBump, 0.01, 1};
  cfg.t2 = 7.0;
  const auto r = close_experiment(cfg);
  ASSERT_TRUE(r.hypotheses_ok) << r.hypothesis_detail;
  EXPECT_TRUE(r.certificates_ok);
  EXPECT_LE(r.sqrt_sum, r.certified_bound);
  EXPECT_TRUE(r.bound_holds);
  EXPECT_GT(r.max_dist, 0.0);
  EXPECT_NEAR(r.promotion_constant * r.sqrt_sum, r.max_dist, 1e-15);
}

TEST(Close, FailsHypothesisFarFromCylinder) {
  CloseConfig cfg;
  cfg.R_dom = 20.0;
  cfg.h = 0.05;
  cfg.profile = {ProfileKind::Bump, 0.3, 1};
  cfg.t2 = 10.0;
  const auto r = close_experiment(cfg);
  EXPECT_FALSE(r.hypotheses_ok);
  EXPECT_EQ(r.exit, ExitReason::DistanceExceeded);
  EXPECT_FALSE(r.hypothesis_detail.empty());
}
