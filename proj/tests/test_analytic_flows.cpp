#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "lojlab/analytic_flows.hpp"
#include "lojlab/errors.hpp"

using namespace lojlab;
using namespace lojlab::flows;

namespace {

// x' = -4x^3 from x0 has x(t) = x0 / sqrt(1 + 8 x0^2 t).
double quartic_exact(double x0, double t) { return x0 / std::sqrt(1.0 + 8.0 * x0 * x0 * t); }

}  // namespace

TEST(Problems, BuiltinsAndLookup) {
  const auto all = builtin_problems();
  EXPECT_EQ(all.size(), 5u);
  EXPECT_EQ(builtin_problem("aniso2d").dimension, 2u);
  EXPECT_THROW(builtin_problem("nonesuch"), InvalidInputError);
}

TEST(Problems, LojasiewiczInequalityAndGradients) {
  std::mt19937_64 rng(3);
  for (const auto& p : builtin_problems()) {
    if (p.name == "saddle2d") continue;
    const auto spot = lojasiewicz_spot_check(p, 2000, rng);
    EXPECT_EQ(spot.violations, 0u) << p.name;
    const auto grad = gradient_consistency(p, 200, rng);
    EXPECT_LT(grad.max_rel_error, 1e-6) << p.name;
  }
  const auto rq = random_quadratic_quartic(4, rng);
  EXPECT_EQ(lojasiewicz_spot_check(rq, 2000, rng).violations, 0u);
}

TEST(Integrate, QuarticClosedForm) {
  const auto p = builtin_problem("quartic1d");
  const std::vector<double> x0{0.2};
  const auto traj = integrate(p, x0, 100.0, 1e-12);
  ASSERT_EQ(traj.unit_marks.size(), 101u);
  for (std::size_t m = 0; m < traj.unit_marks.size(); m += 10) {
    const std::size_t i = traj.unit_marks[m];
    EXPECT_DOUBLE_EQ(traj.times[i], static_cast<double>(m));
    EXPECT_NEAR(traj.points[i][0], quartic_exact(0.2, traj.times[i]), 1e-10);
  }
  EXPECT_NEAR(traj.length(), 0.2 - quartic_exact(0.2, 100.0), 1e-10);
  EXPECT_TRUE(decay_envelope_check(traj, p.tau));
}

TEST(Integrate, CriticalPointStaysPut) {
  for (const auto& p : builtin_problems()) {
    const std::vector<double> origin(p.dimension, 0.0);
    for (double g : p.gradient(origin)) EXPECT_EQ(g, 0.0) << p.name;
    const auto traj = integrate(p, origin, 10.0, 1e-10);
    EXPECT_EQ(traj.length(), 0.0) << p.name;
    EXPECT_EQ(traj.F_values.back(), p.critical_value);
  }
}

TEST(Integrate, StateAtAndTruncation) {
  const auto p = builtin_problem("quartic1d");
  const std::vector<double> x0{0.2};
  const auto traj = integrate(p, x0, 20.0, 1e-12);
  EXPECT_NEAR(state_at(p, traj, 7.5)[0], quartic_exact(0.2, 7.5), 1e-10);
  EXPECT_THROW(state_at(p, traj, 30.0), InvalidInputError);
  const auto cut = truncated_at_mark(traj, 5);
  EXPECT_DOUBLE_EQ(cut.end_time(), 5.0);
  EXPECT_THROW(truncated_at_mark(traj, 50), InvalidInputError);
}

TEST(Integrate, BlockMarksBeyondCap) {
  const auto p = builtin_problem("quartic1d");
  const std::vector<double> x0{0.2};
  IntegrateOptions opt;
  opt.unit_mark_cap = 100;
  const auto traj = integrate(p, x0, 1000.0, 1e-11, opt);
  EXPECT_EQ(traj.unit_marks.size(), 101u);
  ASSERT_FALSE(traj.block_marks.empty());
  const auto s = sqrt_segment_sum(traj);
  EXPECT_GT(s.block_bound, 0.0);
  EXPECT_TRUE(s.segments_ok);
  EXPECT_GE(s.sum, traj.length() - 1e-9);
}

TEST(Integrate, BadArguments) {
  const auto p = builtin_problem("quartic2d");
  EXPECT_THROW(integrate(p, std::vector<double>{0.1}, 1.0, 1e-10), InvalidInputError);
  EXPECT_THROW(integrate(p, std::vector<double>{0.1, 0.1}, 1.0, 0.0), InvalidInputError);
  EXPECT_THROW(integrate(p, std::vector<double>{0.1, 0.1}, -1.0, 1e-10), InvalidInputError);
  EXPECT_THROW(integrate(p, std::vector<double>{3.0, 0.0}, 1.0, 1e-10), PreconditionError);
}

TEST(Integrate, SaddleLeavesBall) {
  const auto p = builtin_problem("saddle2d");
  const auto traj = integrate(p, std::vector<double>{0.1, 0.1}, 10.0, 1e-10);
  EXPECT_TRUE(traj.exited_ball);
  EXPECT_LT(traj.end_time(), 10.0);
  EXPECT_NEAR(std::hypot(traj.points.back()[0], traj.points.back()[1]), p.ball_radius, 1e-6);
}

TEST(SqrtSum, SegmentsDominateLength) {
  const auto p = builtin_problem("aniso2d");
  const auto traj = integrate(p, std::vector<double>{0.2, 0.2}, 200.0, 1e-11);
  const auto s = sqrt_segment_sum(traj);
  EXPECT_EQ(s.segments, 200u);
  EXPECT_TRUE(s.segments_ok);
  EXPECT_GE(s.sum, traj.length() - 1e-9);
  EXPECT_FALSE(s.empty_warning);
}

TEST(EffectiveBound, AboveCase) {
  const auto p = builtin_problem("quartic1d");
  const auto traj = integrate(p, std::vector<double>{0.2}, 100.0, 1e-12);
  const auto r = effective_bound(p, traj, 0.01);
  EXPECT_EQ(r.case_tag, BoundCase::Above);
  EXPECT_TRUE(r.holds);
  EXPECT_TRUE(r.certificates_ok);
  EXPECT_NEAR(r.length, 0.2 - quartic_exact(0.2, 100.0), 1e-10);
}

TEST(EffectiveBound, CrossingCase) {
  // x^2 - y^2 from (0.2, 0.02): F > 0 at t = 0 and F < 0 at t = 1.
  const auto p = builtin_problem("saddle2d");
  const auto traj = integrate(p, std::vector<double>{0.2, 0.02}, 1.0, 1e-12);
  const auto r = effective_bound(p, traj, 0.05);
  EXPECT_EQ(r.case_tag, BoundCase::Crossing);
  ASSERT_TRUE(r.crossing_time.has_value());
  // x(t)^2 = 0.04 e^{-4t} meets y(t)^2 = 0.0004 e^{4t} at e^{8t} = 100.
  EXPECT_NEAR(*r.crossing_time, std::log(100.0) / 8.0, 1e-8);
  EXPECT_TRUE(r.holds);
  EXPECT_EQ(r.parts.size(), 2u);
  for (const auto& part : r.parts) EXPECT_TRUE(part.terminal_zero);
}

TEST(EffectiveBound, BelowCase) {
  const auto p = builtin_problem("saddle2d");
  const auto traj = integrate(p, std::vector<double>{0.01, 0.03}, 1.0, 1e-12);
  const auto r = effective_bound(p, traj, 0.05);
  EXPECT_EQ(r.case_tag, BoundCase::Below);
  EXPECT_TRUE(r.holds);
  EXPECT_THROW(decay_envelope_check(traj, p.tau), EnvelopeNotApplicableError);
}

TEST(EffectiveBound, EndpointPreconditions) {
  const auto p = builtin_problem("quartic1d");
  const auto far = integrate(p, std::vector<double>{0.5}, 3.0, 1e-10);
  EXPECT_THROW(effective_bound(p, far, 0.01), PreconditionError);
  const auto near = integrate(p, std::vector<double>{0.2}, 3.0, 1e-10);
  EXPECT_THROW(effective_bound(p, near, 1e-4), PreconditionError);
  EXPECT_FALSE(last_admissible_mark(near, 1e-4).has_value());
  EXPECT_EQ(*last_admissible_mark(near, 0.01), 3u);
}

TEST(TimeReversal, ReversedFlowHasSameLength) {
  const auto p = builtin_problem("quartic1d");
  const auto traj = integrate(p, std::vector<double>{0.2}, 10.0, 1e-12);
  const auto rev = time_reversed(traj);
  EXPECT_DOUBLE_EQ(rev.start_time(), 0.0);
  EXPECT_DOUBLE_EQ(rev.end_time(), 10.0);
  EXPECT_NEAR(rev.length(), traj.length(), 1e-14);
  EXPECT_NEAR(rev.points.front()[0], traj.points.back()[0], 0.0);
  EXPECT_NEAR(rev.critical_value, -traj.critical_value, 0.0);
}

TEST(Trajectory, CsvHasHeaderAndRows) {
  const auto p = builtin_problem("quartic1d");
  const auto traj = integrate(p, std::vector<double>{0.2}, 2.0, 1e-10);
  std::ostringstream out;
  write_trajectory_csv(out, traj);
  const std::string text = out.str();
  const auto lines = std::count(text.begin(), text.end(), '\n');
  EXPECT_EQ(static_cast<std::size_t>(lines), traj.size() + 1);
}

TEST(EpsilonBall, RadiusKeepsLevelsClose) {
  std::mt19937_64 rng(5);
  const auto p = builtin_problem("quartic2d");
  const double rho = epsilon_ball_radius(p, 0.01, rng);
  EXPECT_GT(rho, 0.0);
  EXPECT_LE(rho, 0.25);
  // Worst point of B_rho for x^4 + y^4 lies on an axis.
  EXPECT_LT(std::pow(rho, 4), 0.005 * (1.0 + 1e-9));
}
