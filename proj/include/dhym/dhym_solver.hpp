#pragma once

// dHYM on flat fibers: the linear n = 1 case and damped Newton for the phase equation.

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dhym/error.hpp"
#include "dhym/functionals.hpp"
#include "dhym/krylov.hpp"
#include "dhym/phase_core.hpp"

namespace dhym {

struct SolverRun {
  int iterations = 0;
  std::vector<double> residuals;  // sup |Theta - h| per iterate, starting with the initial guess
  std::vector<int> backtracks;
  double wall_seconds = 0.0;
  bool converged = false;
  std::string note;
};

struct DhymSolution {
  PotentialField phi;
  SolverRun run;
};

class Stopwatch {
 public:
  Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

inline double phase_residual(const FiberCalculus& fc, const PotentialField& phi, const Eigen::VectorXd& h) {
  auto sp = fc.spectra(fc.curvature_of(phi));
  double r = 0.0;
  for (size_t p = 0; p < sp.size(); ++p) r = std::max(r, std::abs(sp[p].theta - h(static_cast<Eigen::Index>(p))));
  return r;
}

// n = 1: alpha_phi = tan(theta) omega is a Poisson equation.
inline DhymSolution solve_dhym_linear_1d(const FiberCalculus& fc, double theta_hat) {
  if (fc.n() != 1) throw Error(ErrorCode::DimensionUnsupported, "linear solve needs n = 1");
  Stopwatch sw;
  const double g = fc.geometry().omega0(0, 0).real();
  const double tn = std::tan(theta_hat);
  const double a0 = fc.geometry().alpha0(0, 0).real();
  if (!std::isfinite(tn) || std::abs(tn * g - a0) > 1e-10 * std::max(1.0, std::abs(a0)))
    throw Error(ErrorCode::InconsistentClass, "tan(theta_hat) * int omega differs from int alpha");
  auto alpha = fc.curvature_of(PotentialField::Zero(static_cast<Eigen::Index>(fc.nodes())));
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(fc.nodes()));
  for (size_t p = 0; p < fc.nodes(); ++p) rhs(static_cast<Eigen::Index>(p)) = tn * g - alpha[p](0, 0).real();
  const auto& t = fc.torus();
  DhymSolution s;
  // i ddbar has symbol -(kx^2 + ky^2)/2 on the 1x1 matrix
  s.phi = t.apply_symbol(rhs, [&](size_t i) -> cplx {
    double k2 = -(t.multiplier(i, 0, 0).real() + t.multiplier(i, 1, 1).real());
    return k2 == 0.0 ? 0.0 : -2.0 / k2;
  });
  s.phi = gauge_fixed(s.phi);
  s.run.iterations = 1;
  s.run.residuals.push_back(
      phase_residual(fc, s.phi, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(fc.nodes()), theta_hat)));
  s.run.converged = s.run.residuals.back() < 1e-10;
  s.run.wall_seconds = sw.seconds();
  return s;
}

struct NewtonOptions {
  double tol = 1e-8;
  int max_iter = 50;
  int max_backtracks = 40;
  double damping = 0.5;
  double gmres_tol = 1e-11;
  bool check_subsolution = true;
};

namespace detail {

// Real coefficients c_ab with DTheta[v] = sum_{a<=b} c_ab d_a d_b v, one set per node.
struct LinearizedPhase {
  std::vector<std::pair<int, int>> pairs;
  std::vector<Eigen::VectorXd> coeff;
  std::vector<double> mean;
};

inline LinearizedPhase linearize_phase(const FiberCalculus& fc, const std::vector<CMat>& alpha) {
  const int n = fc.n(), d = 2 * n;
  Eigen::LLT<CMat> llt(fc.geometry().omega0);
  CMat linv = llt.matrixL().solve(CMat::Identity(n, n));
  LinearizedPhase lp;
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) lp.pairs.emplace_back(a, b);
  lp.coeff.assign(lp.pairs.size(), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(fc.nodes())));
  Eigen::MatrixXd c(d, d);
  for (size_t p = 0; p < fc.nodes(); ++p) {
    CMat cm = linv * alpha[p] * linv.adjoint();
    cm = 0.5 * (cm + cm.adjoint());
    Eigen::SelfAdjointEigenSolver<CMat> es(cm);
    RVec w = linearization_weights(es.eigenvalues());
    CMat u = linv.adjoint() * es.eigenvectors();
    CMat wm = u * w.cast<cplx>().asDiagonal() * u.adjoint();
    c.setZero();
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double re = 0.5 * wm(k, j).real(), im = 0.5 * wm(k, j).imag();
        c(2 * j, 2 * k) += re;
        c(2 * j + 1, 2 * k + 1) += re;
        c(2 * j, 2 * k + 1) -= im;
        c(2 * j + 1, 2 * k) += im;
      }
    for (size_t q = 0; q < lp.pairs.size(); ++q) {
      auto [a, b] = lp.pairs[q];
      lp.coeff[q](static_cast<Eigen::Index>(p)) = a == b ? c(a, a) : c(a, b) + c(b, a);
    }
  }
  for (const auto& v : lp.coeff) lp.mean.push_back(v.mean());
  return lp;
}

}  // namespace detail

inline DhymSolution solve_dhym_newton(const FiberCalculus& fc, const Eigen::VectorXd& h, const PotentialField& initial,
                                      const NewtonOptions& opt = {}) {
  Stopwatch sw;
  const int n = fc.n();
  const auto N = static_cast<Eigen::Index>(fc.nodes());
  if (h.size() != N || initial.size() != N) throw Error(ErrorCode::DimensionMismatch, "field sizes");
  const double floor = (n - 1) * kPi / 2;
  const auto& t = fc.torus();

  if (opt.check_subsolution) {
    auto sp = fc.spectra(fc.curvature_of(initial));
    for (size_t p = 0; p < sp.size(); ++p)
      if (!c_subsolution_test(sp[p].mu, h(static_cast<Eigen::Index>(p))).ok)
        throw Error(ErrorCode::SubsolutionViolated, "initial potential fails the subsolution test at node " +
                                                        std::to_string(p));
  }

  auto evaluate = [&](const PotentialField& phi, Eigen::VectorXd& g, double& min_theta) {
    auto sp = fc.spectra(fc.curvature_of(phi));
    g.resize(N);
    min_theta = 1e300;
    for (Eigen::Index p = 0; p < N; ++p) {
      g(p) = sp[static_cast<size_t>(p)].theta - h(p);
      min_theta = std::min(min_theta, sp[static_cast<size_t>(p)].theta);
    }
    return g.cwiseAbs().maxCoeff();
  };

  DhymSolution s;
  s.phi = gauge_fixed(initial);
  Eigen::VectorXd g;
  double min_theta = 0.0;
  double res = evaluate(s.phi, g, min_theta);
  s.run.residuals.push_back(res);

  for (int it = 0; it < opt.max_iter && res >= opt.tol; ++it) {
    auto lp = detail::linearize_phase(fc, fc.curvature_of(s.phi));
    OperatorRef op;
    op.n = N;
    op.apply = [&](const Eigen::VectorXd& v) {
      auto vh = t.forward(v);
      Eigen::VectorXd out = Eigen::VectorXd::Zero(N);
      for (size_t q = 0; q < lp.pairs.size(); ++q)
        out += lp.coeff[q].cwiseProduct(t.derivative_from(vh, lp.pairs[q].first, lp.pairs[q].second));
      return out;
    };
    PreconditionerRef pre;
    pre.apply = [&](const Eigen::VectorXd& v) {
      return t.apply_symbol(v, [&](size_t i) -> cplx {
        double sym = 0.0;
        for (size_t q = 0; q < lp.pairs.size(); ++q)
          sym += lp.mean[q] * t.multiplier(i, lp.pairs[q].first, lp.pairs[q].second).real();
        return std::abs(sym) < 1e-300 ? 0.0 : 1.0 / sym;
      });
    };
    auto kr = gmres_solve(op, pre, -g, opt.gmres_tol, 300, 80);
    Eigen::VectorXd step = gauge_fixed(kr.x);

    double lambda = 1.0;
    bool accepted = false, any_in_branch = false;
    int bt = 0;
    for (; bt <= opt.max_backtracks; ++bt, lambda *= opt.damping) {
      PotentialField cand = s.phi + lambda * step;
      Eigen::VectorXd gc;
      double mt = 0.0;
      double rc = evaluate(cand, gc, mt);
      if (mt <= floor) continue;
      any_in_branch = true;
      if (rc < (1.0 - 1e-4 * lambda) * res) {
        s.phi = cand;
        g = gc;
        res = rc;
        accepted = true;
        break;
      }
    }
    s.run.backtracks.push_back(bt);
    ++s.run.iterations;
    if (!accepted) {
      s.run.wall_seconds = sw.seconds();
      if (!any_in_branch) throw Error(ErrorCode::BranchExit, "line search cannot stay above (n-1)pi/2");
      s.run.note = "line search stalled";
      break;
    }
    s.run.residuals.push_back(res);
  }
  s.run.converged = res < opt.tol;
  s.run.wall_seconds = sw.seconds();
  if (!s.run.converged && s.run.note.empty()) s.run.note = "iteration limit";
  return s;
}

inline DhymSolution solve_dhym_newton(const FiberCalculus& fc, double theta_hat, const PotentialField& initial,
                                      const NewtonOptions& opt = {}) {
  return solve_dhym_newton(fc, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(fc.nodes()), theta_hat),
                           initial, opt);
}

}  // namespace dhym
