#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "lojlab/cylinder_geometry.hpp"
#include "lojlab/errors.hpp"

using namespace lojlab;
using namespace lojlab::cyl;

namespace {

constexpr double kPi = std::numbers::pi;

// Composite Simpson rule for the Gaussian area of r(z) = rho + u(z) with an
// analytic derivative, as an independent reference for the kernel.
double simpson_area(int k, const std::function<double(double)>& u, const std::function<double(double)>& du,
                    double L, std::size_t cells) {
  const double rho = std::sqrt(2.0 * k);
  const double h = 2.0 * L / static_cast<double>(cells);
  auto f = [&](double z) {
    const double r = rho + u(z);
    return std::pow(r, k) * std::sqrt(1.0 + du(z) * du(z)) * std::exp(-(r * r + z * z) / 4.0);
  };
  double s = f(-L) + f(L);
  for (std::size_t i = 1; i < cells; ++i) s += (i % 2 ? 4.0 : 2.0) * f(-L + h * static_cast<double>(i));
  return std::pow(4.0 * kPi, -(k + 1) / 2.0) * sphere_area(k) * s * h / 3.0;
}

}  // namespace

TEST(Sphere, AreaClosedForms) {
  EXPECT_NEAR(sphere_area(1), 2.0 * kPi, 1e-14);
  EXPECT_NEAR(sphere_area(2), 4.0 * kPi, 1e-13);
  EXPECT_NEAR(sphere_area(3), 2.0 * kPi * kPi, 1e-13);
  EXPECT_NEAR(sphere_area(4), 8.0 * kPi * kPi / 3.0, 1e-13);
}

TEST(Cylinder, GaussianAreaClosedForms) {
  EXPECT_NEAR(CylinderSpec::make(1).F_value, std::sqrt(2.0 * kPi / std::numbers::e), 1e-14);
  EXPECT_NEAR(CylinderSpec::make(2).F_value, 4.0 / std::numbers::e, 1e-14);
  const auto s = CylinderSpec::make(3);
  EXPECT_EQ(s.n, 4);
  EXPECT_DOUBLE_EQ(s.radius, std::sqrt(6.0));
  EXPECT_THROW(CylinderSpec::make(0), ParameterError);
}

TEST(Cylinder, DiscreteAreaOfZeroProfile) {
  for (int k : {1, 2, 3}) {
    const auto spec = CylinderSpec::make(k);
    const CylinderGraph g(spec, 10.0, 0.1);
    const auto r = graph_F_report(g);
    EXPECT_NEAR(r.value, spec.F_value, 1e-13 * spec.F_value) << k;
    EXPECT_GT(r.tail, 0.0);
    EXPECT_LT(r.tail, 1e-10);
  }
}

TEST(Cylinder, AreaMatchesIndependentQuadrature) {
  const auto spec = CylinderSpec::make(1);
  auto u = [](double z) { return 0.1 * std::exp(-z * z / 4.0) * std::cos(z); };
  auto du = [](double z) {
    return 0.1 * std::exp(-z * z / 4.0) * (-0.5 * z * std::cos(z) - std::sin(z));
  };
  const double ref = simpson_area(1, u, du, 20.0, 40000);
  const auto g = CylinderGraph::from_profile(spec, 20.0, 0.025, u);
  EXPECT_NEAR(graph_F(g), ref, 2e-6);
  const auto fine = CylinderGraph::from_profile(spec, 20.0, 0.0125, u);
  // Second-order in h.
  EXPECT_LT(std::abs(graph_F(fine) - ref), 0.3 * std::abs(graph_F(g) - ref));
}

TEST(Cylinder, AreaIsStationaryAtCylinder) {
  const auto spec = CylinderSpec::make(1);
  auto bump = [](double a) {
    return [a](double z) { return a * std::exp(-z * z / 2.0); };
  };
  const double d1 = graph_F(CylinderGraph::from_profile(spec, 20.0, 0.05, bump(1e-2))) - spec.F_value;
  const double d2 = graph_F(CylinderGraph::from_profile(spec, 20.0, 0.05, bump(5e-3))) - spec.F_value;
  EXPECT_NEAR(d1 / d2, 4.0, 0.05);
}

TEST(Cylinder, DilatedAndShiftedArea) {
  // For k = 1 the dilated cylinder has F(c C) = F(C) c exp(-(c^2 - 1)/2).
  // Axial shifts leave it unchanged.
  const auto spec = CylinderSpec::make(1);
  const CylinderGraph g(spec, 20.0, 0.05);
  for (double c : {0.7, 1.0, 1.4}) {
    const double expect = spec.F_value * c * std::exp(-(c * c - 1.0) / 2.0);
    EXPECT_NEAR(graph_F_report(g, c, 0.0).value, expect, 1e-12) << c;
    EXPECT_NEAR(graph_F_report(g, c, 1.5).value, expect, 1e-12) << c;
  }
  const std::vector<double> centers{-1.0, 0.0, 1.0};
  const std::vector<double> scales{0.8, 0.9, 1.0, 1.1, 1.25};
  const auto e = estimate_entropy(g, centers, scales);
  EXPECT_DOUBLE_EQ(e.scale, 1.0);
  EXPECT_NEAR(e.value, spec.F_value, 1e-12);
  const std::vector<double> bad{0.0};
  EXPECT_THROW(estimate_entropy(g, centers, bad), InvalidInputError);
}

TEST(Cylinder, DistanceOfCosine) {
  const auto spec = CylinderSpec::make(1);
  const double a = 0.01, h = 0.05;
  const auto g = CylinderGraph::from_profile(spec, 20.0, h, [a](double z) { return a * std::cos(z); });
  const auto d = dist_R(g, 5.0);
  EXPECT_NEAR(d.c0, a, 1e-15);
  // pi/2 is not a grid point, so the grid maximum of |sin| is within h^2/8 of 1.
  EXPECT_NEAR(d.c1, a * std::sin(h) / h, a * h * h / 8.0);
  EXPECT_NEAR(d.c2, a * (2.0 - 2.0 * std::cos(h)) / (h * h), 1e-9 * a);
  EXPECT_DOUBLE_EQ(d.dist, std::max({d.c0, d.c1, d.c2}));
  const CylinderGraph zero(spec, 20.0, h);
  EXPECT_DOUBLE_EQ(dist_between(g, zero, 5.0).dist, d.dist);
  EXPECT_EQ(dist_R(zero, 19.9).dist, 0.0);
}

TEST(Cylinder, ErrorPaths) {
  const auto spec = CylinderSpec::make(1);
  EXPECT_THROW(CylinderGraph(spec, 1.0, 0.3), InvalidInputError);
  EXPECT_THROW(CylinderGraph(spec, 0.1, 0.1), InvalidInputError);
  EXPECT_THROW(CylinderGraph(spec, 1.0, -0.1), InvalidInputError);
  CylinderGraph g(spec, 20.0, 0.05);
  EXPECT_THROW(dist_R(g, 19.99), PreconditionError);
  EXPECT_THROW(dist_R(g, -1.0), PreconditionError);
  EXPECT_THROW(dist_between(g, CylinderGraph(spec, 20.0, 0.1), 5.0), InvalidInputError);
  g.u_mut()[100] = -2.0;
  EXPECT_THROW(g.validate(), GeometryError);
  EXPECT_THROW(graph_F(g), GeometryError);
  CylinderGraph h(spec, 20.0, 0.05);
  h.u_mut()[0] = 0.1;
  EXPECT_THROW(h.validate(), GeometryError);
}

TEST(Cylinder, ProfileCsv) {
  const CylinderGraph g(CylinderSpec::make(1), 1.0, 0.5);
  std::ostringstream out;
  write_profile_csv(out, g);
  EXPECT_EQ(out.str(), "z,u\n-1,0\n-0.5,0\n0,0\n0.5,0\n1,0\n");
}
