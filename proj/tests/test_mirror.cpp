#include <gtest/gtest.h>

#include <random>

#include "dhym/dhym_solver.hpp"
#include "dhym/mirror_bridge.hpp"
#include "dhym/syz_mirror.hpp"

using namespace dhym;

namespace {

RVecX v1(double a) { return RVecX::Constant(1, a); }

// Fubini-Study on P^2: log(1 + e^{2x1} + e^{2x2})
ConvexFn p2_potential() {
  ConvexFn p;
  p.m = 2;
  p.f = [](const RVecX& x) { return std::log(1 + std::exp(2 * x(0)) + std::exp(2 * x(1))); };
  p.grad = [](const RVecX& x) {
    double a = std::exp(2 * x(0)), b = std::exp(2 * x(1)), s = 1 + a + b;
    RVecX g(2);
    g << 2 * a / s, 2 * b / s;
    return g;
  };
  p.hess = [](const RVecX& x) {
    double a = std::exp(2 * x(0)), b = std::exp(2 * x(1)), s = 1 + a + b;
    RMatX h(2, 2);
    h << 4 * a * (1 + b) / (s * s), -4 * a * b / (s * s), -4 * a * b / (s * s), 4 * b * (1 + a) / (s * s);
    return h;
  };
  return p;
}

}  // namespace

TEST(Legendre, QuadraticIsSelfDual) {
  auto u = legendre(quadratic_fn(2));
  RVecX y(2);
  y << 0.3, -1.2;
  EXPECT_NEAR(u.f(y), 0.5 * y.squaredNorm(), 1e-14);
  EXPECT_LT((u.hess(y) - RMatX::Identity(2, 2)).norm(), 1e-14);
}

TEST(Legendre, P1ClosedForm) {
  auto u = legendre(p1_potential());
  double err = 0, gerr = 0;
  for (int k = 0; k <= 190; ++k) {
    double y = 0.05 + k * 0.01;
    err = std::max(err, std::abs(u.f(v1(y)) - p1_symplectic_closed_form(y)));
    gerr = std::max(gerr, std::abs(u.grad(v1(y))(0) - 0.5 * std::log(y / (2 - y))));
  }
  EXPECT_LT(err, 1e-8);
  EXPECT_LT(gerr, 1e-10);
}

TEST(Legendre, InvolutionAndReciprocity) {
  auto phi = p1_potential();
  auto back = legendre(legendre(phi));
  double err = 0;
  for (int k = 0; k <= 40; ++k) {
    double x = -2 + 0.1 * k;
    err = std::max(err, std::abs(back.f(v1(x)) - phi.f(v1(x))));
  }
  EXPECT_LT(err, 1e-7);

  auto p2 = p2_potential();
  auto u2 = legendre(p2);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(0.1, 0.9);
  for (int k = 0; k < 50; ++k) {
    RVecX y(2);
    y << d(rng), d(rng);
    if (y.sum() > 1.9) continue;
    RMatX prod = u2.hess(y) * p2.hess(u2.grad(y));
    EXPECT_LT((prod - RMatX::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-8);
  }
  auto rt = legendre(legendre(p2));
  RVecX x(2);
  x << 0.4, -0.7;
  EXPECT_NEAR(rt.f(x), p2.f(x), 1e-7);
}

TEST(Legendre, RejectsNonConvex) {
  ConvexFn bad{1, [](const RVecX& x) { return std::pow(x(0), 4) - x(0) * x(0); },
               [](const RVecX& x) { return v1(4 * std::pow(x(0), 3) - 2 * x(0)); },
               [](const RVecX& x) { return RMatX::Constant(1, 1, 12 * x(0) * x(0) - 2); }};
  std::vector<RVecX> samples;
  for (int k = -10; k <= 10; ++k) samples.push_back(v1(0.1 * k));
  EXPECT_THROW(check_convex(bad, samples), Error);
  EXPECT_THROW(legendre(bad).f(v1(0.5)), Error);
}

TEST(LyzSection, TrivialSections) {
  auto u = legendre(quadratic_fn(1));
  auto grid = SectionGrid::interval(-1, 1, 21);
  auto zero = lyz_section(u, [](const RVecX&) { return v1(0); }, grid);
  for (const auto& t : zero.theta) EXPECT_EQ(t(0), 0.0);
  EXPECT_EQ(slag_residual(zero, 0.0).sup, 0.0);
  auto lin = lyz_section(u, [](const RVecX&) { return v1(0.7); }, grid);
  for (const auto& t : lin.theta) EXPECT_NEAR(t(0), 0.7, 1e-15);
}

TEST(SlagResidual, ConstantSlopeClosedForm) {
  auto u = legendre(quadratic_fn(1));
  auto grid = SectionGrid::interval(-1, 1, 41);
  const double c = 0.8;
  auto s = lyz_section(u, [c](const RVecX& y) { return v1(c * y(0)); }, grid);
  auto r = slag_residual(s, 0.3);
  EXPECT_NEAR(r.sup, std::abs(std::sin(std::atan(c) - 0.3)), 1e-13);
  EXPECT_LT(slag_residual(s, std::atan(c)).sup, 1e-13);
}

TEST(SlagResidual, SecondOrderOnCurvedSection) {
  auto u = legendre(p1_potential());
  auto exact = [](double y) {
    double h = 1e-5;  // derivative of the family by a fine central difference of the closed form
    return std::atan((p1_model_family(3, 1.0, 1.0, y + h) - p1_model_family(3, 1.0, 1.0, y - h)) / (2 * h));
  };
  std::vector<double> errs;
  for (int nodes : {129, 257, 513}) {
    auto grid = SectionGrid::interval(0.1, 1.9, nodes);
    auto s = lyz_section(u, pull_gradient(u, p1_family_x_gradient(3, 1.0, 1.0)), grid);
    auto r = slag_residual(s, 0.0);
    double e = 0;
    for (size_t p = 0; p < grid.size(); ++p) e = std::max(e, std::abs(r.phase(static_cast<Eigen::Index>(p)) - exact(grid.point(p)(0))));
    errs.push_back(e);
  }
  EXPECT_NEAR(errs[0] / errs[1], 4.0, 0.4);
  EXPECT_NEAR(errs[1] / errs[2], 4.0, 0.4);
}

TEST(P1Family, ValuesAndLimits) {
  EXPECT_NEAR(p1_model_family(3, 0.7, 0.0, 1.0), -3 - 0.7 / 9, 1e-15);
  double err = 0;
  for (int k = 0; k <= 180; ++k) {
    double y = 0.1 + 0.01 * k;
    err = std::max(err, std::abs(p1_model_family(3, 1.0, 20.0, y) - p1_model_limit(3, 1.0, y)));
  }
  EXPECT_LT(err, 1e-9);
  // gaps of the limit against -k y at the two ends
  EXPECT_NEAR(std::abs(p1_model_limit(3, 1.0, 0.0) + 0.0), 4.0, 1e-15);
  EXPECT_NEAR(std::abs(p1_model_limit(3, 1.0, 2.0) + 6.0), 2.0, 1e-15);
  // monotone in s, decreasing below y = 4/3 and increasing above
  for (double s = 0; s < 5; s += 0.5) {
    for (double y : {0.3, 1.0, 1.3}) EXPECT_LT(p1_model_family(3, 1.0, s + 0.5, y), p1_model_family(3, 1.0, s, y));
    for (double y : {1.4, 1.8}) EXPECT_GT(p1_model_family(3, 1.0, s + 0.5, y), p1_model_family(3, 1.0, s, y));
  }
}

TEST(P1Family, IsTheLyzTransformOfTheModelCurve) {
  auto u = legendre(p1_potential());
  auto grid = SectionGrid::interval(0.05, 1.95, 191);
  for (double s : {0.0, 1.0, 3.0}) {
    auto sec = lyz_section(u, pull_gradient(u, p1_family_x_gradient(3, 1.0, s)), grid);
    double err = 0;
    for (size_t p = 0; p < grid.size(); ++p)
      err = std::max(err, std::abs(sec.theta[p](0) - p1_model_family(3, 1.0, s, grid.point(p)(0))));
    EXPECT_LT(err, 1e-8) << s;
  }
}

TEST(Mirror, DhymSolutionIsSpecialLagrangian) {
  const double theta = 0.6;
  auto g = FiberGeometry::flat(1, 64, CMat::Constant(1, 1, 1.0), CMat::Constant(1, 1, std::tan(theta)));
  g.grid = {64, 8};
  SpectralTorus t(g.grid);
  g.background.resize(static_cast<Eigen::Index>(t.size()));
  for (size_t p = 0; p < t.size(); ++p) g.background(static_cast<Eigen::Index>(p)) = 0.03 * std::cos(2 * kPi * t.coord(p, 0)) + 0.01 * std::sin(4 * kPi * t.coord(p, 0));
  FiberCalculus fc(g);
  auto sol = solve_dhym_newton(fc, theta, PotentialField::Zero(static_cast<Eigen::Index>(fc.nodes())));
  ASSERT_TRUE(sol.run.converged);
  double prev = 1e300;
  for (int nodes : {256, 512, 1024}) {
    auto fm = fiber_mirror_section(fc, sol.phi, theta, nodes);
    auto r = slag_residual(fm.section, fm.theta_tilde);
    EXPECT_LT(r.sup, 1e-6) << nodes;
    EXPECT_LE(r.sup, prev * 1.5 + 1e-12);
    prev = r.sup;
  }
  // the undeformed background alone is not special Lagrangian
  auto raw = fiber_mirror_section(fc, PotentialField::Zero(static_cast<Eigen::Index>(fc.nodes())), theta, 256);
  EXPECT_GT(slag_residual(raw.section, raw.theta_tilde).sup, 1e-3);
}

TEST(Mirror, RoundtripIsHamiltonian) {
  auto u = legendre(p2_potential());
  SectionGrid grid;
  grid.dims = {9, 9};
  grid.lo = RVecX::Constant(2, 0.1);
  grid.hi = RVecX::Constant(2, 0.8);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> c(-1, 1);
  double a1 = c(rng), a2 = c(rng), a3 = c(rng), b1 = c(rng), b2 = c(rng);
  // x-side gradients of f1 = a1 sin x1 cos x2 + a2 x1 x2 + a3 x2^2, f2 = b1 exp(0.3 x1) + b2 cos(x1 - x2)
  std::function<RVecX(const RVecX&)> f1 = [=](const RVecX& x) {
    RVecX g(2);
    g << a1 * std::cos(x(0)) * std::cos(x(1)) + a2 * x(1), -a1 * std::sin(x(0)) * std::sin(x(1)) + a2 * x(0) + 2 * a3 * x(1);
    return g;
  };
  std::function<RVecX(const RVecX&)> f2 = [=](const RVecX& x) {
    RVecX g(2);
    g << 0.3 * b1 * std::exp(0.3 * x(0)) - b2 * std::sin(x(0) - x(1)), b2 * std::sin(x(0) - x(1));
    return g;
  };
  auto r = mirror_roundtrip(u, pull_gradient(u, f1), pull_gradient(u, f2), grid);
  EXPECT_EQ(r.cells, 64);
  EXPECT_LT(r.sup_curl, 1e-8);
  EXPECT_GT(r.sup_difference, 1e-3);
  auto same = mirror_roundtrip(u, pull_gradient(u, f1), pull_gradient(u, f1), grid);
  EXPECT_EQ(same.sup_difference, 0.0);
}
