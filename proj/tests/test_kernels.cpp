#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "lojlab/errors.hpp"
#include "lojlab/kernels/kernels.hpp"

using namespace lojlab;
using namespace lojlab::kernels;

namespace {

struct Grid {
  std::vector<double> z;
  std::vector<double> u;
};

Grid random_grid(std::size_t n, double amplitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Grid g;
  const double h = 40.0 / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    g.z.push_back(-20.0 + h * static_cast<double>(i));
    g.u.push_back(amplitude * std::sin(0.7 * g.z.back()) + 0.1 * amplitude * U(rng));
  }
  return g;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

const KernelTable* vector_table() {
  const KernelTable* t = avx2_table();
  return t && cpu_supports_avx2() ? t : nullptr;
}

}  // namespace

TEST(Kernels, ScalarTableIsComplete) {
  const auto& t = scalar_table();
  EXPECT_EQ(t.backend, Backend::Scalar);
  EXPECT_NE(t.rhs, nullptr);
  EXPECT_NE(t.area, nullptr);
  EXPECT_NE(t.max_abs_diff, nullptr);
  EXPECT_NE(t.axpby, nullptr);
  EXPECT_STREQ(to_string(Backend::Scalar), "scalar");
}

TEST(Kernels, RhsMatchesDirectFormula) {
  // r_t = u_zz/(1+u_z^2) - k/r + r/2 - (z/2) u_z with r = rho + u.
  for (int k : {1, 2, 3}) {
    const Grid g = random_grid(101, 0.3, 17 + k);
    RhsParams p{0.4, std::sqrt(2.0 * k), k};
    std::vector<double> out(g.u.size());
    const double min_r = scalar_table().rhs(g.u.data(), g.z.data(), g.u.size(), p, out.data());
    double expect_min = 1e300;
    for (std::size_t i = 0; i < g.u.size(); ++i) expect_min = std::min(expect_min, p.rho + g.u[i]);
    EXPECT_DOUBLE_EQ(min_r, expect_min);
    EXPECT_EQ(out.front(), 0.0);
    EXPECT_EQ(out.back(), 0.0);
    for (std::size_t i = 1; i + 1 < g.u.size(); ++i) {
      const double uz = (g.u[i + 1] - g.u[i - 1]) / (2.0 * p.h);
      const double uzz = (g.u[i + 1] - 2.0 * g.u[i] + g.u[i - 1]) / (p.h * p.h);
      const double r = p.rho + g.u[i];
      const double direct = uzz / (1.0 + uz * uz) - k / r + r / 2.0 - 0.5 * g.z[i] * uz;
      ASSERT_NEAR(out[i], direct, 1e-12 * (1.0 + std::abs(direct))) << i;
    }
  }
}

TEST(Kernels, RhsVanishesOnCylinder) {
  std::vector<double> z(41), u(41, 0.0), out(41);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = -4.0 + 0.2 * static_cast<double>(i);
  RhsParams p{0.2, std::sqrt(2.0), 1};
  scalar_table().rhs(u.data(), z.data(), u.size(), p, out.data());
  for (double v : out) EXPECT_EQ(v, 0.0);
}

TEST(Kernels, Avx2MatchesScalarBitwise) {
  const KernelTable* v = vector_table();
  if (!v) GTEST_SKIP() << "AVX2 backend unavailable";
  const auto& s = scalar_table();
  // Odd sizes exercise the remainder loops.
  for (std::size_t n : {5u, 6u, 7u, 8u, 9u, 37u, 801u}) {
    const Grid g = random_grid(n, 0.2, n);
    for (int k : {1, 2}) {
      RhsParams p{40.0 / static_cast<double>(n - 1), std::sqrt(2.0 * k), k};
      std::vector<double> a(n), b(n);
      const double ma = s.rhs(g.u.data(), g.z.data(), n, p, a.data());
      const double mb = v->rhs(g.u.data(), g.z.data(), n, p, b.data());
      ASSERT_TRUE(same_bits(ma, mb));
      for (std::size_t i = 0; i < n; ++i) ASSERT_TRUE(same_bits(a[i], b[i])) << "n=" << n << " i=" << i;

      std::vector<double> w = g.u;
      for (double& x : w) x *= 1.0001;
      ASSERT_TRUE(same_bits(s.max_abs_diff(g.u.data(), w.data(), n), v->max_abs_diff(g.u.data(), w.data(), n)));

      std::vector<double> ya = w, yb = w;
      s.axpby(0.3, g.u.data(), 0.7, ya.data(), n);
      v->axpby(0.3, g.u.data(), 0.7, yb.data(), n);
      for (std::size_t i = 0; i < n; ++i) ASSERT_TRUE(same_bits(ya[i], yb[i]));

      for (double scale : {0.8, 1.0, 1.3}) {
        for (double shift : {-1.0, 0.0, 0.5}) {
          AreaParams ap{p.h, p.rho, k, scale, shift};
          const double as = s.area(g.u.data(), g.z.data(), n, ap);
          const double av = v->area(g.u.data(), g.z.data(), n, ap);
          ASSERT_NEAR(av, as, 1e-13 * std::abs(as)) << n;
        }
      }
    }
  }
}

TEST(Kernels, VectorExpMatchesStd) {
  if (!vector_table()) GTEST_SKIP() << "AVX2 backend unavailable";
  std::vector<double> x;
  for (double t = -700.0; t <= 700.0; t += 0.37) x.push_back(t);
  for (double t = -1.0; t <= 1.0; t += 1e-3) x.push_back(t);
  x.push_back(-750.0);
  x.push_back(0.0);
  std::vector<double> out(x.size());
  exp_batch(x.data(), out.data(), x.size(), Backend::Avx2);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double ref = std::exp(x[i]);
    ASSERT_NEAR(out[i], ref, 4e-16 * ref) << x[i];
  }
}

TEST(Kernels, ScalarExpIsStd) {
  const double x[3] = {-2.0, 0.0, 3.5};
  double out[3];
  exp_batch(x, out, 3, Backend::Scalar);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(out[i], std::exp(x[i]));
}

TEST(Kernels, SelectAndActive) {
  const Backend before = active().backend;
  select(Backend::Scalar);
  EXPECT_EQ(active().backend, Backend::Scalar);
  if (vector_table()) {
    select(Backend::Avx2);
    EXPECT_EQ(active().backend, Backend::Avx2);
  } else {
    EXPECT_THROW(select(Backend::Avx2), ParameterError);
  }
  select(before);
  EXPECT_TRUE(detect_backend() == Backend::Scalar || vector_table() != nullptr);
}
