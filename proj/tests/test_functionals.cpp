#include <gtest/gtest.h>

#include <random>

#include "dhym/functionals.hpp"
#include "dhym/quadrature.hpp"

using namespace dhym;

namespace {

CMat scalar(double v) { return CMat::Constant(1, 1, v); }

// band-limited random field with modes |m| <= kmax on each axis
PotentialField random_field(const SpectralTorus& t, int kmax, std::mt19937_64& rng, double amp = 0.05) {
  std::normal_distribution<double> g(0.0, amp);
  PotentialField f = PotentialField::Zero(static_cast<Eigen::Index>(t.size()));
  const int d = t.rank();
  std::vector<int> m(d, -kmax);
  while (true) {
    double a = g(rng), b = g(rng);
    for (size_t p = 0; p < t.size(); ++p) {
      double arg = 0.0;
      for (int ax = 0; ax < d; ++ax) arg += m[ax] * t.coord(p, ax);
      f(static_cast<Eigen::Index>(p)) += a * std::cos(2 * kPi * arg) + b * std::sin(2 * kPi * arg);
    }
    int ax = 0;
    while (ax < d && ++m[ax] > kmax) m[ax++] = -kmax;
    if (ax == d) break;
  }
  return f;
}

}  // namespace

TEST(CurvatureForm, ZeroAndCosine) {
  FiberCalculus fc(FiberGeometry::flat(1, 16, scalar(1.0), scalar(0.3)));
  auto a = curvature_form(fc, PotentialField::Zero(256));
  for (const auto& m : a) EXPECT_NEAR(std::abs(m(0, 0) - 0.3), 0.0, 1e-15);
  PotentialField phi(256);
  for (size_t p = 0; p < 256; ++p) phi(p) = 0.7 * std::cos(2 * kPi * fc.torus().coord(p, 0));
  a = curvature_form(fc, phi);
  double mean = 0.0;
  for (size_t p = 0; p < 256; ++p) {
    double expect = 0.3 + 0.5 * (-4 * kPi * kPi) * phi(p);
    EXPECT_NEAR(a[p](0, 0).real(), expect, 1e-11);
    mean += a[p](0, 0).real() - 0.3;
  }
  EXPECT_NEAR(mean / 256, 0.0, 1e-12);
}

TEST(CurvatureForm, FourthOrderDifferences) {
  std::mt19937_64 rng(3);
  const int N = 256;
  FiberCalculus fc(FiberGeometry::flat(1, N, scalar(1.0), scalar(0.0)));
  PotentialField phi = random_field(fc.torus(), 2, rng);
  auto a = curvature_form(fc, phi);
  const double h = 1.0 / N;
  auto at = [&](int i, int j) { return phi(((i + N) % N) + N * ((j + N) % N)); };
  double err = 0.0, scale = 0.0;
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < N; ++i) {
      double fxx = (-at(i + 2, j) + 16 * at(i + 1, j) - 30 * at(i, j) + 16 * at(i - 1, j) - at(i - 2, j)) / (12 * h * h);
      double fyy = (-at(i, j + 2) + 16 * at(i, j + 1) - 30 * at(i, j) + 16 * at(i, j - 1) - at(i, j - 2)) / (12 * h * h);
      double ref = 0.5 * (fxx + fyy);
      err = std::max(err, std::abs(a[i + N * j](0, 0).real() - ref));
      scale = std::max(scale, std::abs(ref));
    }
  EXPECT_LT(err / scale, 1e-6);
}

TEST(CurvatureForm, MixedTermsTwoDimensional) {
  // phi = cos(2pi(x1 + y2)) has d1 dbar2 phi = (1/4)(d_x1 - i d_y1)(d_x2 + i d_y2) phi
  FiberCalculus fc(FiberGeometry::flat(2, 8, CMat::Identity(2, 2), CMat::Zero(2, 2)));
  const auto& t = fc.torus();
  PotentialField phi(static_cast<Eigen::Index>(t.size()));
  for (size_t p = 0; p < t.size(); ++p) phi(p) = std::cos(2 * kPi * (t.coord(p, 0) + t.coord(p, 3)));
  auto a = curvature_form(fc, phi);
  for (size_t p = 0; p < t.size(); p += 37) {
    double c = phi(p), k2 = 4 * kPi * kPi;
    EXPECT_NEAR(a[p](0, 0).real(), -0.5 * k2 * c, 1e-9);
    EXPECT_NEAR(a[p](1, 1).real(), -0.5 * k2 * c, 1e-9);
    EXPECT_NEAR(a[p](0, 1).real(), 0.0, 1e-9);
    EXPECT_NEAR(a[p](0, 1).imag(), -0.5 * k2 * c, 1e-9);
    EXPECT_NEAR(std::abs(a[p](1, 0) - std::conj(a[p](0, 1))), 0.0, 1e-12);
  }
}

TEST(HatTheta, ClassIntegrals) {
  FiberCalculus f1(FiberGeometry::flat(1, 8, scalar(1.0), scalar(0.4)));
  EXPECT_NEAR(hat_theta(f1).principal, std::atan(0.4), 1e-15);
  FiberCalculus f2(FiberGeometry::flat(2, 8, CMat::Identity(2, 2), CMat::Identity(2, 2)));
  EXPECT_NEAR(std::abs(f2.class_integral() - cplx(0, 2)), 0.0, 1e-14);
  EXPECT_NEAR(hat_theta(f2).principal, kPi / 2, 1e-15);
  FiberCalculus f3(FiberGeometry::flat(2, 8, CMat::Identity(2, 2), 3.0 * CMat::Identity(2, 2)));
  EXPECT_NEAR(std::abs(f3.class_integral() - cplx(-8, 6)), 0.0, 1e-13);
  EXPECT_NEAR(hat_theta(f3).principal, kPi - std::atan(6.0 / 8.0), 1e-14);
  PotentialField zero = PotentialField::Zero(4096);
  auto h = hat_theta(f3, &zero);
  ASSERT_TRUE(h.lift.has_value());
  EXPECT_NEAR(*h.lift, 2 * std::atan(3.0), 1e-14);
}

TEST(CY, ConstantsAndZero) {
  for (int n : {1, 2}) {
    CMat w = CMat::Identity(n, n), a = 0.7 * CMat::Identity(n, n);
    FiberCalculus fc(FiberGeometry::flat(n, 8, w, a));
    PotentialField z = PotentialField::Zero(static_cast<Eigen::Index>(fc.nodes()));
    EXPECT_EQ(std::abs(cy_closed_form(fc, z)), 0.0);
    PotentialField k = PotentialField::Constant(static_cast<Eigen::Index>(fc.nodes()), 1.3);
    EXPECT_NEAR(std::abs(cy_closed_form(fc, k) - 1.3 * fc.class_integral()), 0.0, 1e-12);
  }
}

TEST(CY, StraightPathGaussOracle) {
  std::mt19937_64 rng(5);
  for (int n : {1, 2}) {
    CMat w = CMat::Identity(n, n), a = 0.8 * CMat::Identity(n, n);
    if (n == 2) w(0, 1) = 0.2, w(1, 0) = 0.2, a(0, 1) = cplx(0.1, 0.3), a(1, 0) = cplx(0.1, -0.3);
    FiberCalculus fc(FiberGeometry::flat(n, n == 1 ? 32 : 8, w, a));
    PotentialField phi = random_field(fc.torus(), n == 1 ? 3 : 1, rng, 0.01);
    cplx ref = 0.0;
    for (auto [t, wt] : gauss_legendre<64>(0.0, 1.0)) ref += wt * cy_differential(fc, t * phi, phi);
    cplx cf = cy_closed_form(fc, phi);
    EXPECT_LT(std::abs(cf - ref), 1e-8 * std::abs(ref)) << "n=" << n;

    std::vector<PotentialField> path;
    std::vector<double> s;
    for (int k = 0; k <= 64; ++k) {
      s.push_back(k / 64.0);
      path.push_back((k / 64.0) * phi);
    }
    EXPECT_LT(std::abs(path_cy(fc, path, s) - cf), 1e-6 * std::abs(cf));
  }
}

TEST(CY, PathIndependence) {
  std::mt19937_64 rng(6);
  FiberCalculus fc(FiberGeometry::flat(1, 32, scalar(1.0), scalar(0.5)));
  PotentialField a = random_field(fc.torus(), 2, rng, 0.01), b = random_field(fc.torus(), 2, rng, 0.01);
  PotentialField w1 = random_field(fc.torus(), 2, rng, 0.01), w2 = random_field(fc.torus(), 2, rng, 0.01);
  std::vector<PotentialField> p1, p2;
  std::vector<double> s;
  for (int k = 0; k <= 64; ++k) {
    double t = k / 64.0;
    s.push_back(t);
    p1.push_back((1 - t) * a + t * b + std::sin(kPi * t) * w1);
    p2.push_back((1 - t) * a + t * b + t * (1 - t) * w2 + std::sin(2 * kPi * t) * w1);
  }
  cplx c1 = path_cy(fc, p1, s), c2 = path_cy(fc, p2, s);
  cplx ref = cy_closed_form(fc, b) - cy_closed_form(fc, a);
  EXPECT_LT(std::abs(c1 - c2), 1e-6 * std::abs(ref));
  EXPECT_LT(std::abs(c1 - ref), 1e-6 * std::abs(ref));
}

TEST(CY, TooFewSamples) {
  FiberCalculus fc(FiberGeometry::flat(1, 8, scalar(1.0), scalar(0.5)));
  std::vector<PotentialField> p(2, PotentialField::Zero(64));
  EXPECT_THROW(path_cy(fc, p, {0.0, 1.0}), Error);
  std::vector<PotentialField> q(5, PotentialField::Constant(64, 0.2));
  EXPECT_NEAR(std::abs(path_cy(fc, q, {0, 0.25, 0.5, 0.75, 1.0})), 0.0, 1e-15);
}

TEST(Functionals, IdentitiesAndVolumeBound) {
  std::mt19937_64 rng(8);
  FiberCalculus fc(FiberGeometry::flat(1, 16, scalar(1.0), scalar(0.6)));
  double th = hat_theta(fc).principal;
  auto z = functionals_at(fc, PotentialField::Zero(256), th);
  EXPECT_EQ(std::abs(z.cy), 0.0);
  EXPECT_EQ(z.j, 0.0);
  EXPECT_EQ(z.c, 0.0);
  double bound = std::abs(fc.class_integral());
  EXPECT_NEAR(z.v, bound, 1e-12);
  for (int trial = 0; trial < 50; ++trial) {
    PotentialField phi = random_field(fc.torus(), 2, rng, 0.01);
    auto f = functionals_at(fc, phi, th);
    cplx rot = std::exp(cplx(0, -th)) * f.cy;
    EXPECT_NEAR(f.c, rot.real(), 1e-14);
    EXPECT_NEAR(-f.j, rot.imag(), 1e-14);
    EXPECT_GE(f.v, bound - 1e-9);
    EXPECT_LE(max_imaginary_z_density(fc, phi), 0.0);
  }
}

TEST(Probe, AffineConstants) {
  std::vector<FunctionalSample> s;
  for (int k = 0; k < 9; ++k) s.push_back(functionals_from_cy(cplx(0.5 + k * 0.25, 0.1), 0.3, 1, k * 0.125));
  auto r = second_difference_probe(s);
  EXPECT_EQ(r.c.shape, Shape::Affine);
  EXPECT_NEAR(r.c.max_d2, 0.0, 1e-14);
  EXPECT_THROW(second_difference_probe(std::vector<FunctionalSample>(3)), Error);
}

TEST(CY, StencilWeights) {
  auto w = detail::fd_weights(0.0, {-2, -1, 0, 1, 2});
  const double ref[] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(w[i], ref[i], 1e-15);
  // one-sided nine-point stencil is exact on degree 8
  std::vector<double> x;
  for (int i = 0; i < 9; ++i) x.push_back(0.1 * i);
  auto v = detail::fd_weights(0.0, x);
  double d = 0;
  for (int i = 0; i < 9; ++i) d += v[i] * std::pow(x[i] - 0.3, 8);
  EXPECT_NEAR(d, 8 * std::pow(-0.3, 7), 1e-9);
}

TEST(CY, PathWeightsOrder) {
  // eighth-order rule: exact on degree 7, and the error on exp shrinks ~2^8 per halving
  for (size_t m : {16, 17, 33}) {
    auto w = detail::path_weights(m, 1.0 / (m - 1));
    double d7 = 0;
    for (size_t k = 0; k < m; ++k) d7 += w[k] * std::pow(static_cast<double>(k) / (m - 1), 7);
    EXPECT_NEAR(d7, 1.0 / 8, 1e-13);
  }
  auto err = [](size_t m) {
    auto w = detail::path_weights(m, 3.0 / (m - 1));
    double acc = 0;
    for (size_t k = 0; k < m; ++k) acc += w[k] * std::exp(3.0 * k / (m - 1));
    return std::abs(acc - (std::exp(3.0) - 1));
  };
  EXPECT_GT(err(33) / err(65), 150.0);
}
