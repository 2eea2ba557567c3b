#include <gtest/gtest.h>

#include <random>

#include "dhym/regmax.hpp"

using namespace dhym;

TEST(RegularizedMax, KernelMoments) {
  const auto& r = RegularizedMax::instance();
  double mass = 0.0, second = 0.0;
  for (auto [x, w] : composite_gauss_legendre<32>(-2.0, 2.0, 64)) {
    mass += w * r.q(x);
    second += w * x * x * r.q(x);
  }
  EXPECT_NEAR(mass, 1.0, 1e-10);
  EXPECT_GT(second, 0.0);
  EXPECT_NEAR(r.G(2.0), 2.0, 1e-12);
  EXPECT_NEAR(r.G(1.999999), 1.999999, 1e-9);
}

TEST(RegularizedMax, ExactOutsideBand) {
  EXPECT_EQ(regularized_max(3.0, 1.0, 0.5), 3.0);
  EXPECT_EQ(regularized_max(1.0, 3.0, 0.5), 3.0);
  double m = regularized_max(0.0, 0.0, 0.3);
  EXPECT_GE(m, 0.0);
  EXPECT_LE(m, 0.3);
}

TEST(RegularizedMax, DemaillyProperties) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> ut(-3.0, 3.0), ud(1e-3, 2.0), uc(-5.0, 5.0);
  const auto& r = RegularizedMax::instance();
  for (int trial = 0; trial < 10000; ++trial) {
    double t0 = ut(rng), t1 = ut(rng), d = ud(rng), c = uc(rng);
    auto v = r.eval(t0, t1, d);
    EXPECT_GE(v.m, std::max(t0, t1) - 1e-8);
    EXPECT_LE(v.m, std::max(t0 + d, t1 + d) + 1e-8);
    if (t1 + d <= t0 - d) EXPECT_EQ(v.m, t0);
    if (t0 + d <= t1 - d) EXPECT_EQ(v.m, t1);
    EXPECT_NEAR(r(t0 + c, t1 + c, d), v.m + c, 1e-10);
    EXPECT_GE(v.d0, -1e-12);
    EXPECT_GE(v.d1, -1e-12);
    EXPECT_NEAR(v.d0 + v.d1, 1.0, 1e-14);
    EXPECT_GE(v.dd, 0.0);
    // convexity along a random chord
    double s0 = ut(rng), s1 = ut(rng);
    double mid = r(0.5 * (t0 + s0), 0.5 * (t1 + s1), d);
    EXPECT_LE(mid, 0.5 * (v.m + r(s0, s1, d)) + 1e-8);
  }
}

TEST(RegularizedMax, DerivativesMatchDifferences) {
  const auto& r = RegularizedMax::instance();
  for (double u : {-1.7, -0.9, -0.2, 0.0, 0.35, 1.1, 1.8}) {
    double d = 0.4, t1 = 0.2, t0 = t1 + u * d, h = 1e-6;
    auto v = r.eval(t0, t1, d);
    EXPECT_NEAR(v.d0, (r(t0 + h, t1, d) - r(t0 - h, t1, d)) / (2 * h), 1e-7);
    double h2 = 1e-4;
    double fd2 = (r(t0 + h2, t1, d) - 2 * v.m + r(t0 - h2, t1, d)) / (h2 * h2);
    EXPECT_NEAR(v.dd, fd2, 1e-4 * std::max(1.0, v.dd));
  }
}
