#include <gtest/gtest.h>

#include <random>

#include "dhym/phase_core.hpp"

using namespace dhym;

namespace {

CMat random_hermitian(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  CMat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cplx(g(rng), g(rng));
  return 0.5 * (a + a.adjoint());
}

CMat random_spd(std::mt19937_64& rng, int n) {
  CMat b = random_hermitian(rng, n);
  return b * b.adjoint() + CMat::Identity(n, n);
}

// roots of det(alpha - lambda omega) from the companion matrix of its characteristic polynomial
std::vector<double> charpoly_roots(const CMat& w, const CMat& a) {
  const int n = static_cast<int>(w.rows());
  // det(a - l w) as a polynomial in l via interpolation at n+1 points
  Eigen::VectorXcd vals(n + 1);
  Eigen::MatrixXcd vand(n + 1, n + 1);
  for (int k = 0; k <= n; ++k) {
    double l = k - n / 2.0;
    vals(k) = (a - l * w).determinant();
    for (int j = 0; j <= n; ++j) vand(k, j) = std::pow(l, j);
  }
  Eigen::VectorXcd c = vand.fullPivLu().solve(vals);
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) comp(i, n - 1) = -c(i) / c(n);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp);
  std::vector<double> r;
  for (int i = 0; i < n; ++i) r.push_back(es.eigenvalues()(i).real());
  std::sort(r.begin(), r.end(), std::greater<>());
  return r;
}

}  // namespace

TEST(RelativeEigenvalues, DiagonalAndScaled) {
  auto mu = relative_eigenvalues(make_pencil(CMat::Identity(2, 2),
                                             CMat(Eigen::Vector2cd(1, -1).asDiagonal())));
  EXPECT_NEAR(mu(0), 1.0, 1e-14);
  EXPECT_NEAR(mu(1), -1.0, 1e-14);
  CMat a = CMat(Eigen::Vector3cd(6, 0, -2).asDiagonal());
  mu = relative_eigenvalues(make_pencil(2.0 * CMat::Identity(3, 3), a));
  EXPECT_NEAR(mu(0), 3.0, 1e-14);
  EXPECT_NEAR(mu(1), 0.0, 1e-14);
  EXPECT_NEAR(mu(2), -1.0, 1e-14);
}

TEST(RelativeEigenvalues, MatchesCharacteristicRoots) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    CMat w = random_spd(rng, 4), a = random_hermitian(rng, 4);
    auto mu = relative_eigenvalues(make_pencil(w, a));
    auto ref = charpoly_roots(w, a);
    for (int i = 0; i < 4; ++i)
      EXPECT_NEAR(mu(i), ref[i], 1e-10 * std::max(1.0, std::abs(ref[i])));
  }
}

TEST(RelativeEigenvalues, CongruenceInvariant) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    CMat w = random_spd(rng, 3), a = random_hermitian(rng, 3);
    CMat s = random_hermitian(rng, 3) + 3.0 * CMat::Identity(3, 3);
    auto m1 = relative_eigenvalues(make_pencil(w, a));
    auto m2 = relative_eigenvalues(make_pencil(s.adjoint() * w * s, s.adjoint() * a * s));
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(m1(i), m2(i), 1e-9 * std::max(1.0, std::abs(m1(i))));
  }
}

TEST(RelativeEigenvalues, Errors) {
  CMat w = CMat::Identity(2, 2);
  w(1, 1) = -1.0;
  try {
    relative_eigenvalues(make_pencil(w, CMat::Zero(2, 2)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveMetric);
  }
  CMat a = CMat::Zero(2, 2);
  a(0, 1) = 1.0;
  try {
    relative_eigenvalues(make_pencil(CMat::Identity(2, 2), a));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonHermitian);
  }
}

TEST(PhaseAndRadius, ClosedForms) {
  auto p = phase_and_radius(RVec::Zero(3));
  EXPECT_EQ(p.theta, 0.0);
  EXPECT_EQ(p.r, 1.0);
  p = phase_and_radius(RVec::Constant(2, 1.0));
  EXPECT_NEAR(p.theta, kPi / 2, 1e-15);
  EXPECT_NEAR(p.r, 2.0, 1e-14);
}

TEST(PhaseAndRadius, ComplexProductOracle) {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> dn(1, 6);
  std::normal_distribution<double> g(0.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    RVec mu(dn(rng));
    for (auto& v : mu) v = g(rng);
    auto p = phase_and_radius(mu);
    cplx z = phase_product(mu);
    double d = std::remainder(p.theta - std::arg(z), 2 * kPi);
    EXPECT_NEAR(d, 0.0, 1e-12);
    EXPECT_NEAR(p.r, std::abs(z), 1e-12 * p.r);
    EXPECT_GE(p.r, 1.0);
  }
}

TEST(PhaseAndRadius, BlockAdditivity) {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> g(0.0, 2.0);
  RVec a(2), b(3);
  for (auto& v : a) v = g(rng);
  for (auto& v : b) v = g(rng);
  RVec ab(5);
  ab << a, b;
  auto pa = phase_and_radius(a), pb = phase_and_radius(b), pab = phase_and_radius(ab);
  EXPECT_NEAR(pab.theta, pa.theta + pb.theta, 1e-14);
  EXPECT_NEAR(pab.r, pa.r * pb.r, 1e-12 * pab.r);
}

TEST(PhaseAndRadius, RotatedIdentity) {
  RVec mu(3);
  mu << 2.0, 0.3, -0.7;
  auto p = phase_and_radius(mu);
  double th = 0.9;
  cplx z = std::exp(cplx(0, -th)) * phase_product(mu);
  EXPECT_NEAR(z.real(), p.r * std::cos(p.theta - th), 1e-12);
  EXPECT_NEAR(z.imag(), p.r * std::sin(p.theta - th), 1e-12);
}

TEST(Linearization, Weights) {
  EXPECT_EQ(linearization_weights(RVec::Zero(1))(0), 1.0);
  RVec mu(2);
  mu << 1.0, -1.0;
  auto w = linearization_weights(mu);
  EXPECT_DOUBLE_EQ(w(0), 0.5);
  EXPECT_DOUBLE_EQ(w(1), 0.5);
}

TEST(Linearization, FiniteDifferences) {
  std::mt19937_64 rng(15);
  std::normal_distribution<double> g(0.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    RVec mu(1 + trial % 5);
    for (auto& v : mu) v = g(rng);
    auto w = linearization_weights(mu);
    for (int i = 0; i < mu.size(); ++i) {
      RVec p = mu, m = mu;
      p(i) += 1e-5;
      m(i) -= 1e-5;
      double fd = (phase_and_radius(p).theta - phase_and_radius(m).theta) / 2e-5;
      EXPECT_NEAR(fd, w(i), 1e-6 * w(i));
    }
  }
}

TEST(Hessian, TrivialCases) {
  EXPECT_EQ(hessian_quadratic_form(RVec::Zero(2), CMat::Zero(2, 2)), 0.0);
  EXPECT_EQ(hessian_quadratic_form(RVec::Zero(2), CMat::Identity(2, 2)), 0.0);
  EXPECT_THROW(hessian_quadratic_form(RVec::Zero(2), CMat::Identity(3, 3)), Error);
}

TEST(Hessian, SecondDifferences) {
  std::mt19937_64 rng(16);
  std::normal_distribution<double> g(0.0, 1.5);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 1 + trial % 5;
    RVec mu(n);
    for (auto& v : mu) v = g(rng);
    CMat a = random_hermitian(rng, n);
    double h = 1e-4;
    double fd = (phase_of_shifted(mu, a, h) - 2 * phase_of_shifted(mu, a, 0) + phase_of_shifted(mu, a, -h)) / (h * h);
    double q = hessian_quadratic_form(mu, a);
    EXPECT_NEAR(fd, q, 1e-5 * std::max(std::abs(q), 1e-2));
  }
}

TEST(Branch, DeepInterior) {
  RVec mu(3);
  mu << 10.0, 10.0, 10.0;  // n = 2 fiber plus time
  auto rep = branch_property_report(mu, {0.0, 0.1, 0.1}, 200);
  EXPECT_TRUE(rep.all_hold());
  RVec mu2(2);
  mu2 << std::tan(1.4), std::tan(0.3);
  auto r2 = branch_property_report(mu2, {0.0, 0.1, 0.1}, 200);
  EXPECT_TRUE(r2.all_hold());
  EXPECT_GT(r2.checks[2].margin, 0.0);
}

TEST(Branch, NotInBranch) {
  RVec mu(2);
  mu << -1.0, -1.0;
  EXPECT_THROW(branch_property_report(mu, {0.0, 0.1, 0.1}, 10), Error);
}

TEST(Branch, RejectionSampled) {
  for (int m : {3, 4, 5}) {
    for (double eta : {0.05, 0.2}) {
      auto samples = detail::sample_branch(m, eta, 1000, 100 + m);
      double a_global = global_concavity_constant(m, eta, 500);
      for (const auto& mu : samples) {
        auto rep = branch_property_report(mu, {0.0, eta, 0.1}, 1);
        for (const auto& c : rep.checks)
          if (c.id != 8) EXPECT_TRUE(c.holds) << "property " << c.id;
        EXPECT_TRUE(std::isfinite(rep.concavity_A_point));
        (void)a_global;
      }
    }
  }
}

TEST(Subsolution, Examples) {
  RVec mu(2);
  mu << 1e9, 1e9;
  EXPECT_TRUE(c_subsolution_test(mu, kPi - 0.1).ok);
  EXPECT_FALSE(c_subsolution_test(RVec::Zero(1), kPi / 2).ok);
  auto t = c_subsolution_test(RVec::Constant(3, 1.0), 3 * kPi / 4);
  EXPECT_TRUE(t.ok);
  EXPECT_NEAR(t.margin, kPi / 4, 1e-14);
}

TEST(DegeneratePhase, BlockClosedForms) {
  CMat wx = CMat::Identity(1, 1);
  CMat a = CMat::Zero(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = 0.5;
  auto d = degenerate_phase(wx, a);
  EXPECT_FALSE(d.divergent);
  EXPECT_NEAR(d.value, std::atan(0.5) + kPi / 2, 1e-6);
  d = degenerate_phase(wx, CMat::Zero(2, 2));
  EXPECT_NEAR(d.value, 0.0, 1e-12);
  a(0, 0) = -1.0;
  a(1, 1) = 1.0;
  d = degenerate_phase(wx, a);
  EXPECT_NEAR(d.value, kPi / 4 - kPi / 2, 1e-6);
}

TEST(DegeneratePhase, NonPositiveMetric) {
  CMat wx = -CMat::Identity(1, 1);
  EXPECT_THROW(degenerate_phase(wx, CMat::Zero(2, 2)), Error);
}
