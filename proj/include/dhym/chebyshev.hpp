#pragma once

// Chebyshev-Gauss-Lobatto collocation on [0,1].

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "dhym/error.hpp"

namespace dhym {

class ChebyshevLobatto {
 public:
  explicit ChebyshevLobatto(int points) : m_(points) {
    if (points < 3) throw Error(ErrorCode::DimensionMismatch, "need at least three Lobatto points");
    const int n = points - 1;
    s_.resize(points);
    Eigen::VectorXd x(points), c(points);
    for (int j = 0; j <= n; ++j) {
      x(j) = std::cos(std::numbers::pi * j / n);
      s_(j) = 0.5 * (1.0 - x(j));
      c(j) = ((j == 0 || j == n) ? 2.0 : 1.0) * ((j % 2) ? -1.0 : 1.0);
    }
    // differentiation matrix in x, negative-sum trick on the diagonal
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(points, points);
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j)
        if (i != j) d(i, j) = (c(i) / c(j)) / (x(i) - x(j));
    for (int i = 0; i <= n; ++i) d(i, i) = -d.row(i).sum();
    d1_ = -2.0 * d;  // ds = -dx / 2
    d2_ = d1_ * d1_;
    bary_.resize(points);
    for (int j = 0; j <= n; ++j) bary_(j) = ((j % 2) ? -1.0 : 1.0) * ((j == 0 || j == n) ? 0.5 : 1.0);
  }

  int size() const { return m_; }
  const Eigen::VectorXd& nodes() const { return s_; }
  const Eigen::MatrixXd& d1() const { return d1_; }
  const Eigen::MatrixXd& d2() const { return d2_; }

  // row vector mapping nodal values to the interpolant at s
  Eigen::RowVectorXd interpolation_row(double s) const {
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(m_);
    for (int j = 0; j < m_; ++j)
      if (std::abs(s - s_(j)) < 1e-15) {
        r(j) = 1.0;
        return r;
      }
    double den = 0.0;
    for (int j = 0; j < m_; ++j) {
      r(j) = bary_(j) / (s - s_(j));
      den += r(j);
    }
    return r / den;
  }

  Eigen::MatrixXd interpolation_matrix(const std::vector<double>& s) const {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(s.size()), m_);
    for (size_t k = 0; k < s.size(); ++k) m.row(static_cast<Eigen::Index>(k)) = interpolation_row(s[k]);
    return m;
  }

 private:
  int m_;
  Eigen::VectorXd s_, bary_;
  Eigen::MatrixXd d1_, d2_;
};

}  // namespace dhym
