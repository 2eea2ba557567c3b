#include <gtest/gtest.h>

#include "dhym/model_curve.hpp"

using namespace dhym;

namespace {

CMat scalar(double v) { return CMat::Constant(1, 1, v); }

}  // namespace

TEST(ModelCurve, TrivialIdealShiftsByConstant) {
  const double theta = 0.6, delta = 0.1;
  ModelCurve mc(1, scalar(1), scalar(std::tan(theta)), {FlagIdeal::Kind::Trivial, 3}, delta);
  auto g = FiberGeometry::flat(1, 16, scalar(1), scalar(std::tan(theta)));
  auto f = mc.field(g, 2.0);
  EXPECT_LT((f.array() + delta * 3 * 2.0 / std::numbers::pi).abs().maxCoeff(), 1e-14);
  auto z = mc.cy_slope(5.0);
  // the slope is a real multiple of e^{i theta}: no obstruction
  EXPECT_NEAR((std::exp(cplx(0, -theta)) * z).imag(), 0.0, 1e-15);
  EXPECT_NEAR(z.real(), -delta * 3 / std::numbers::pi, 1e-15);
}

TEST(ModelCurve, HessianMatchesSpectralDerivative) {
  const double theta = 0.6;
  ModelCurve mc(1, scalar(1), scalar(std::tan(theta)), {}, 0.2);
  auto g = FiberGeometry::flat(1, 64, scalar(1), scalar(std::tan(theta)));
  SpectralTorus t(g.grid);
  auto f = mc.field(g, 0.0);  // smooth at s = 0
  auto h = complex_hessian(t, 1, f);
  double err = 0;
  for (size_t p = 0; p < t.size(); ++p) err = std::max(err, std::abs(h[p](0, 0) - 0.2 * mc.ddbar_psi(ModelCurve::coords(t, p), 0.0)(0, 0)));
  EXPECT_LT(err, 1e-8);
}

TEST(ModelCurve, PointSlopeMatchesRadialIntegral) {
  // direct radial integral: int dPhi/ds * i delta ddbar psi -> -i delta^2 / (2 pi)
  const double delta = 0.05;
  ModelCurve mc(1, scalar(1), scalar(std::tan(0.6)), {}, delta);
  auto z = mc.cy_slope(12.0);
  EXPECT_NEAR(z.imag() / (-delta * delta / (2 * std::numbers::pi)), 1.0, 1e-6);
  EXPECT_LT(std::abs(z.real()), 1e-9);
  auto z8 = mc.cy_slope(8.0);
  EXPECT_NEAR(z8.imag() / z.imag(), 1.0, 1e-3);
}

TEST(ModelCurve, DeltaMaxSeparatesBranchExit) {
  const double theta = 0.6;
  CMat w = scalar(1), a = scalar(std::tan(theta));
  auto scan = delta_max_scan(1, w, a, {}, theta, 8.0, 4.0, 30);
  ASSERT_GT(scan.delta_max, 0.0);
  ASSERT_LT(scan.delta_max, 4.0);
  auto s = slice_schedule(8.0);
  EXPECT_NO_THROW(verify_ray(ModelCurve(1, w, a, {}, 0.98 * scan.delta_max), theta, s));
  try {
    verify_ray(ModelCurve(1, w, a, {}, 1.05 * scan.delta_max), theta, s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DeltaTooLarge);
  }
  auto g = FiberGeometry::flat(1, 32, w, a);
  EXPECT_NO_THROW(model_curve_potential(g, {}, 0.05, 8.0, theta));
}
