#pragma once

// Pointwise linear algebra of the Lagrangian phase operator.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "dhym/error.hpp"

namespace dhym {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kHermitianTol = 1e-12;

struct HermitianPencil {
  int dim = 0;
  CMat omega;
  CMat alpha;
};

struct PhaseSpectrum {
  RVec mu;  // descending
  double theta = 0.0;
  double r = 1.0;
};

struct BranchWindow {
  double theta_hat = 0.0;
  double eta1 = 0.1;
  double eta2 = 0.1;
};

namespace detail {

inline double hermitian_defect(const CMat& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

inline CMat checked_hermitian(const CMat& a, const char* name) {
  double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if (hermitian_defect(a) > kHermitianTol * scale)
    throw Error(ErrorCode::NonHermitian, std::string(name) + " is not Hermitian");
  return 0.5 * (a + a.adjoint());
}

}  // namespace detail

inline HermitianPencil make_pencil(const CMat& omega, const CMat& alpha) {
  if (omega.rows() != omega.cols() || alpha.rows() != alpha.cols() || omega.rows() != alpha.rows())
    throw Error(ErrorCode::DimensionMismatch, "pencil blocks must be square and of equal size");
  return {static_cast<int>(omega.rows()), omega, alpha};
}

// Spectrum of omega^{-1} alpha via Cholesky reduction to a Hermitian eigenproblem.
inline RVec relative_eigenvalues(const HermitianPencil& p) {
  if (p.omega.rows() != p.dim || p.alpha.rows() != p.dim)
    throw Error(ErrorCode::DimensionMismatch, "pencil dimension");
  CMat w = detail::checked_hermitian(p.omega, "omega");
  CMat a = detail::checked_hermitian(p.alpha, "alpha");
  Eigen::LLT<CMat> llt(w);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::NonPositiveMetric, "omega is not positive definite");
  CMat l = llt.matrixL();
  if (l.diagonal().real().minCoeff() <= 0.0)
    throw Error(ErrorCode::NonPositiveMetric, "omega is not positive definite");
  // C = L^{-1} a L^{-*}
  CMat tmp = llt.matrixL().solve(a);
  CMat c = llt.matrixL().solve(tmp.adjoint()).adjoint();
  c = 0.5 * (c + c.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(c, Eigen::EigenvaluesOnly);
  RVec ev = es.eigenvalues();
  std::sort(ev.data(), ev.data() + ev.size(), std::greater<>());
  return ev;
}

inline PhaseSpectrum phase_and_radius(const RVec& mu) {
  PhaseSpectrum out;
  out.mu = mu;
  std::sort(out.mu.data(), out.mu.data() + out.mu.size(), std::greater<>());
  double th = 0.0, logr = 0.0;
  for (double m : mu) {
    th += std::atan(m);
    logr += 0.5 * std::log1p(m * m);
  }
  out.theta = th;
  out.r = std::exp(logr);
  return out;
}

inline PhaseSpectrum phase_and_radius(const HermitianPencil& p) {
  return phase_and_radius(relative_eigenvalues(p));
}

// prod (1 + i mu_k); its argument is the phase mod 2pi and its modulus the radius
inline cplx phase_product(const RVec& mu) {
  cplx z(1.0, 0.0);
  for (double m : mu) z *= cplx(1.0, m);
  return z;
}

inline RVec linearization_weights(const RVec& mu) {
  return mu.unaryExpr([](double m) { return 1.0 / (1.0 + m * m); });
}

// Phase of diag(mu) + t A, used as the oracle for the derivative formulas.
inline double phase_of_shifted(const RVec& mu, const CMat& a, double t) {
  CMat m = CMat(mu.cast<cplx>().asDiagonal()) + t * a;
  m = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(m, Eigen::EigenvaluesOnly);
  double th = 0.0;
  for (double e : es.eigenvalues()) th += std::atan(e);
  return th;
}

// Second directional derivative of the phase at diag(mu) along the Hermitian matrix a.
// The sign is negative: the phase is concave where mu_i + mu_j >= 0.
inline double hessian_quadratic_form(const RVec& mu, const CMat& a) {
  if (a.rows() != mu.size() || a.cols() != mu.size())
    throw Error(ErrorCode::DimensionMismatch, "direction and spectrum sizes differ");
  detail::checked_hermitian(a, "direction");
  const Eigen::Index n = mu.size();
  double q = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      q -= (mu(i) + mu(j)) / ((1 + mu(i) * mu(i)) * (1 + mu(j) * mu(j))) * std::norm(a(i, j));
  return q;
}

struct PropertyCheck {
  int id = 0;
  bool applicable = true;
  bool holds = true;
  double margin = 0.0;  // >= 0 when the property holds
  std::string note;
};

struct BranchReport {
  std::vector<PropertyCheck> checks;
  double concavity_A_point = 0.0;   // smallest A making -exp(-A F) concave at this mu
  double concavity_A_global = 0.0;  // max over a sampled branch set for (size, eta1)
  bool all_hold() const {
    return std::all_of(checks.begin(), checks.end(), [](const PropertyCheck& c) { return c.holds; });
  }
};

namespace detail {

// Smallest A with diag(-2 mu_i g_i^2) - A g g^T negative semidefinite, g_i = 1/(1+mu_i^2).
inline double concavity_constant(const RVec& mu) {
  const Eigen::Index n = mu.size();
  RVec g = linearization_weights(mu);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) d(i, i) = -2.0 * mu(i) * g(i) * g(i);
  auto nsd = [&](double a) {
    Eigen::MatrixXd m = d - a * g * g.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff() <= 1e-14;
  };
  if (nsd(0.0)) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (!nsd(hi)) {
    hi *= 2.0;
    if (hi > 1e12) return std::numeric_limits<double>::infinity();
  }
  for (int it = 0; it < 80; ++it) {
    double mid = 0.5 * (lo + hi);
    (nsd(mid) ? hi : lo) = mid;
  }
  return hi;
}

// Branch members drawn in angle space: arctan values uniform, rejected below the threshold.
inline std::vector<RVec> sample_branch(int m, double eta1, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-kPi / 2, kPi / 2);
  std::vector<RVec> out;
  const double floor = (m - 2) * kPi / 2 + eta1;
  while (static_cast<int>(out.size()) < count) {
    RVec mu(m);
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
      double a = u(rng);
      s += a;
      mu(i) = std::tan(a);
    }
    if (s >= floor) out.push_back(mu);
  }
  return out;
}

}  // namespace detail

inline double global_concavity_constant(int m, double eta1, int samples = 4000, std::uint64_t seed = 7) {
  double best = 0.0;
  for (const RVec& mu : detail::sample_branch(m, eta1, samples, seed))
    best = std::max(best, detail::concavity_constant(mu));
  return best;
}

// mu has m = n+1 entries (space-time count); the branch is sum arctan >= (n-1) pi/2 + eta1.
inline BranchReport branch_property_report(const RVec& mu_in, const BranchWindow& w,
                                           int concavity_samples = 2000) {
  const int m = static_cast<int>(mu_in.size());
  if (m < 2) throw Error(ErrorCode::DimensionMismatch, "need at least two eigenvalues");
  RVec mu = mu_in;
  std::sort(mu.data(), mu.data() + m, std::greater<>());
  const int n = m - 1;
  const double tol = 1e-12;
  double theta = 0.0;
  for (double v : mu) theta += std::atan(v);
  if (theta < (n - 1) * kPi / 2 + w.eta1 - tol)
    throw Error(ErrorCode::NotInBranch, "phase below (n-1)pi/2 + eta1");

  const double mn = mu(n), mn1 = mu(n - 1);
  BranchReport rep;
  auto add = [&](int id, bool applicable, double margin, std::string note) {
    PropertyCheck c;
    c.id = id;
    c.applicable = applicable;
    c.margin = applicable ? margin : 0.0;
    c.holds = !applicable || margin >= -tol;
    c.note = std::move(note);
    rep.checks.push_back(c);
  };

  add(1, true, std::min(mn1, mn1 - std::abs(mn)), "mu_{n-1} > 0 and |mu_n| <= mu_{n-1}");
  if (mn <= 0)
    add(2, true, mn + mn1 - std::tan(w.eta1), "mu_n <= 0: mu_n + mu_{n-1} >= tan(eta1)");
  else
    add(2, true, mn1 - std::tan(w.eta1 / 2), "mu_n >= 0: mu_{n-1} >= tan(eta1/2)");
  add(3, true, mu.sum(), "sum mu > 0");
  add(4, true, mn + 1.0 / std::tan(w.eta1), "mu_n >= -cot(eta1)");
  {
    bool app = theta <= (n + 1) * kPi / 2 - w.eta2 + tol;
    add(5, app, 1.0 / std::tan(w.eta2 / m) - mn, "mu_n <= cot(eta2/m)");
  }
  {
    bool app = mn < 0;
    double s = 0.0;
    for (double v : mu) s += 1.0 / v;
    add(6, app, -std::tan(w.eta1) - s, "sum 1/mu < -tan(eta1)");
  }
  rep.concavity_A_point = detail::concavity_constant(mu);
  rep.concavity_A_global =
      std::max(rep.concavity_A_point, global_concavity_constant(m, w.eta1, concavity_samples));
  add(8, true, rep.concavity_A_global - rep.concavity_A_point, "A(eta1) covers this point");
  return rep;
}

struct SubsolutionTest {
  bool ok = false;
  double margin = 0.0;
  std::vector<double> slack;
};

inline SubsolutionTest c_subsolution_test(const RVec& mu, double h) {
  SubsolutionTest t;
  double total = 0.0;
  for (double v : mu) total += std::atan(v);
  t.margin = std::numeric_limits<double>::infinity();
  for (double v : mu) {
    double sl = (total - std::atan(v)) - (h - kPi / 2);
    t.slack.push_back(sl);
    t.margin = std::min(t.margin, sl);
  }
  t.ok = t.margin > 0.0;
  return t;
}

struct DegeneratePhase {
  bool divergent = false;
  double value = 0.0;
  std::vector<double> eps;
  std::vector<double> theta;
  std::vector<double> extrapolants;
};

// Limit of the space-time phase as the time metric degenerates; slot 0 of alpha_st is time.
inline DegeneratePhase degenerate_phase(const CMat& omega_x, const CMat& alpha_st) {
  const Eigen::Index n = omega_x.rows();
  if (alpha_st.rows() != n + 1 || alpha_st.cols() != n + 1)
    throw Error(ErrorCode::DimensionMismatch, "alpha_st must be (n+1)x(n+1)");
  DegeneratePhase out;
  for (int k = 1; k <= 5; ++k) {
    double e = std::pow(10.0, -k);
    CMat w = CMat::Zero(n + 1, n + 1);
    w(0, 0) = e * e;
    w.bottomRightCorner(n, n) = omega_x;
    out.eps.push_back(e);
    out.theta.push_back(phase_and_radius(make_pencil(w, alpha_st)).theta);
  }
  // error ~ c eps^2 and eps^2 drops by 100 per step
  for (size_t k = 1; k < out.theta.size(); ++k)
    out.extrapolants.push_back(out.theta[k] + (out.theta[k] - out.theta[k - 1]) / 99.0);
  const auto& r = out.extrapolants;
  double last = std::abs(r[r.size() - 1] - r[r.size() - 2]);
  double prev = std::abs(r[r.size() - 2] - r[r.size() - 3]);
  out.divergent = last > 1e-4 || (last > 1e-12 && last > prev);
  out.value = r.back();
  return out;
}

}  // namespace dhym
