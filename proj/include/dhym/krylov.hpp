#pragma once

// Matrix-free GMRES on top of Eigen's restarted Householder implementation.

#include <functional>

#include <Eigen/Dense>
#include <unsupported/Eigen/IterativeSolvers>

namespace dhym {

struct OperatorRef {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> apply;
  Eigen::Index n = 0;
  Eigen::Index rows() const { return n; }
  Eigen::Index cols() const { return n; }
  Eigen::VectorXd operator*(const Eigen::VectorXd& x) const { return apply(x); }
};

struct PreconditionerRef {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> apply;
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const { return apply ? apply(b) : b; }
};

struct KrylovResult {
  Eigen::VectorXd x;
  Eigen::Index iterations = 0;
  double error = 0.0;
  bool converged = false;
};

inline KrylovResult gmres_solve(const OperatorRef& a, const PreconditionerRef& m, const Eigen::VectorXd& b,
                                double tol = 1e-10, Eigen::Index max_iter = 400, Eigen::Index restart = 60) {
  KrylovResult r;
  r.x = Eigen::VectorXd::Zero(b.size());
  r.iterations = max_iter;
  r.error = tol;
  r.converged = Eigen::internal::gmres(a, b, r.x, m, r.iterations, restart, r.error);
  return r;
}

}  // namespace dhym
