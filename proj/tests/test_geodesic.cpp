#include <gtest/gtest.h>

#include "dhym/geodesic.hpp"

using namespace dhym;

namespace {

CMat scalar(double v) { return CMat::Constant(1, 1, v); }

constexpr double kTheta = 0.6;

AnnulusGrid make_grid(int nx, int ns, double eps, double amp0, double amp1) {
  AnnulusGrid g;
  g.geometry = FiberGeometry::flat(1, nx, scalar(1.0), scalar(std::tan(kTheta)));
  g.geometry.grid = {nx, 8};
  SpectralTorus t(g.geometry.grid);
  g.phi0.resize(static_cast<Eigen::Index>(t.size()));
  g.phi1.resize(static_cast<Eigen::Index>(t.size()));
  for (size_t p = 0; p < t.size(); ++p) {
    double x = t.coord(p, 0);
    g.phi0(static_cast<Eigen::Index>(p)) = amp0 * std::cos(2 * kPi * x);
    g.phi1(static_cast<Eigen::Index>(p)) = amp1 * std::sin(2 * kPi * x) + 0.1;
  }
  g.s_nodes = ns;
  g.epsilon = eps;
  return g;
}

}  // namespace

TEST(Chebyshev, DifferentiatesAndInterpolates) {
  ChebyshevLobatto c(17);
  Eigen::VectorXd f = c.nodes().array().sin() * c.nodes().array().exp();
  Eigen::VectorXd df = c.d1() * f, d2 = c.d2() * f;
  for (int j = 0; j < c.size(); ++j) {
    double s = c.nodes()(j);
    EXPECT_NEAR(df(j), std::exp(s) * (std::sin(s) + std::cos(s)), 1e-11);
    EXPECT_NEAR(d2(j), 2 * std::exp(s) * std::cos(s), 1e-9);
  }
  std::vector<double> pts{0.0, 0.123, 0.5, 0.77, 1.0};
  Eigen::VectorXd v = c.interpolation_matrix(pts) * f;
  for (size_t k = 0; k < pts.size(); ++k)
    EXPECT_NEAR(v(static_cast<Eigen::Index>(k)), std::sin(pts[k]) * std::exp(pts[k]), 1e-13);
}

TEST(RadialGrid, FiniteDifferencesExactOnQuadratics) {
  RadialGrid r(33, RadialScheme::FiniteDifference);
  Eigen::VectorXd f = (3 * r.nodes().array().square() - r.nodes().array() + 2).matrix();
  EXPECT_LT(((r.d1() * f).array() - (6 * r.nodes().array() - 1)).abs().maxCoeff(), 1e-10);
  EXPECT_LT(((r.d2() * f).array() - 6.0).abs().maxCoeff(), 1e-8);
  std::vector<double> pts{0.0, 0.01, 0.5, 0.999, 1.0};
  Eigen::VectorXd c = (r.nodes().array().cube()).matrix();
  Eigen::VectorXd v = r.interpolation_matrix(pts) * c;
  for (size_t k = 0; k < pts.size(); ++k) EXPECT_NEAR(v(static_cast<Eigen::Index>(k)), std::pow(pts[k], 3), 1e-14);
}

TEST(Geodesic, ChebyshevSchemeAgreesWithDifferences) {
  auto fd = make_grid(32, 65, 0.1, 0.02, 0.015);
  auto ch = fd;
  ch.radial = RadialScheme::Chebyshev;
  ch.s_nodes = 25;
  GeodesicOptions o;
  o.tol = 1e-9;
  auto a = solve_epsilon_geodesic(fd, kTheta), b = solve_epsilon_geodesic(ch, kTheta, o);
  std::vector<double> pts{0.25, 0.5, 0.75};
  Eigen::MatrixXd pa = a.phi * RadialGrid(65, RadialScheme::FiniteDifference).interpolation_matrix(pts).transpose();
  Eigen::MatrixXd pb = b.phi * RadialGrid(25, RadialScheme::Chebyshev).interpolation_matrix(pts).transpose();
  EXPECT_LT((pa - pb).cwiseAbs().maxCoeff(), 1e-4);  // second-order error at h = 1/64
}

TEST(Geodesic, EqualEndpointsAreStationary) {
  auto g = make_grid(32, 17, 0.1, 0.0, 0.0);
  g.phi1 = g.phi0;
  auto sol = solve_epsilon_geodesic(g, kTheta);
  EXPECT_TRUE(sol.run.converged);
  EXPECT_LT(sol.phi.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Geodesic, ConvergesAndFunctionalsHaveShape) {
  auto g = make_grid(32, 33, 0.1, 0.02, 0.015);
  auto sol = solve_epsilon_geodesic(g, kTheta);
  EXPECT_TRUE(sol.run.converged);
  EXPECT_LE(sol.run.iterations, 30);
  EXPECT_LT(sol.run.residuals.back(), 1e-8);
  AnnulusOperator op(g, kTheta);
  EXPECT_LT(op.residual(sol.phi), 1e-8);
  EXPECT_GE(sol.start_gap, -1e-10);
  auto rep = second_difference_probe(sol.functionals, 1e-6);
  EXPECT_EQ(rep.j.shape, Shape::Convex);
  EXPECT_EQ(rep.c.shape, Shape::Affine);
  EXPECT_NE(rep.re_z.shape, Shape::Convex);
}

TEST(Geodesic, ScalingAndCauchy) {
  std::vector<GeodesicSolution> runs;
  for (double eps : {0.2, 0.1, 0.05, 0.025}) runs.push_back(solve_epsilon_geodesic(make_grid(32, 33, eps, 0.02, 0.015), kTheta));
  auto sc = estimate_scaling_study(runs);
  EXPECT_TRUE(sc.spatial_uniform) << sc.hess_variation;
  EXPECT_TRUE(sc.temporal_bounded) << sc.time_ratio;
  auto w = weak_geodesic_extrapolate(runs);
  ASSERT_EQ(w.cauchy.size(), 3u);
  EXPECT_LT(w.cauchy[2], w.cauchy[0]);
  EXPECT_DOUBLE_EQ(w.epsilon, 0.025);
}

TEST(Geodesic, SubsolutionBundleIsBelow) {
  auto g = make_grid(32, 33, 0.1, 0.02, 0.015);
  auto b = build_subsolution(g, kTheta, 0.2);
  EXPECT_GE(b.min_margin, -1e-9);
  EXPECT_LT(b.boundary_error, 1e-12);
  auto sol = solve_epsilon_geodesic(g, kTheta);
  EXPECT_LE((b.underline_phi - sol.phi).maxCoeff(), 1e-10);
}

TEST(Geodesic, StructuralWindow) {
  auto g = make_grid(32, 17, 0.1, 0.1, 0.0);  // curvature goes negative somewhere
  try {
    build_subsolution(g, kTheta, 0.2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StructuralFailure);
  }
}

TEST(Geodesic, YDependentDataRejected) {
  auto g = make_grid(16, 9, 0.1, 0.02, 0.0);
  g.phi0(20) += 1e-3;
  try {
    solve_epsilon_geodesic(g, kTheta);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedGeometry);
  }
}

TEST(Geodesic, CircleReductionMatchesFullAnnulus) {
  auto g = make_grid(16, 9, 0.2, 0.02, 0.015);
  auto r = s1_spot_check(g, kTheta, 8);
  EXPECT_LT(r.residual, 1e-10);
  EXPECT_LT(r.sup_difference, 1e-8);
}
