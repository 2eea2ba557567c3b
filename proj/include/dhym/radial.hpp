#pragma once

// Discretization of s in [0,1]: uniform second-order differences or Chebyshev-Lobatto.
// Chebyshev is spectrally accurate but its clustered nodes amplify roundoff in the
// second derivative by O(N^4), which dominates once divided by the small annulus weight.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dhym/chebyshev.hpp"
#include "dhym/error.hpp"

namespace dhym {

enum class RadialScheme { FiniteDifference, Chebyshev };

inline std::string to_string(RadialScheme r) {
  return r == RadialScheme::Chebyshev ? "chebyshev" : "fd";
}

class RadialGrid {
 public:
  RadialGrid(int points, RadialScheme scheme) : scheme_(scheme) {
    if (points < 5) throw Error(ErrorCode::DimensionMismatch, "need at least five s nodes");
    if (scheme == RadialScheme::Chebyshev) {
      cheb_.emplace_back(points);
      s_ = cheb_[0].nodes();
      d1_ = cheb_[0].d1();
      d2_ = cheb_[0].d2();
      return;
    }
    const int n = points - 1;
    const double h = 1.0 / n;
    s_ = Eigen::VectorXd::LinSpaced(points, 0.0, 1.0);
    d1_ = Eigen::MatrixXd::Zero(points, points);
    d2_ = Eigen::MatrixXd::Zero(points, points);
    for (int j = 1; j < n; ++j) {
      d1_(j, j - 1) = -0.5 / h;
      d1_(j, j + 1) = 0.5 / h;
      d2_(j, j - 1) = d2_(j, j + 1) = 1.0 / (h * h);
      d2_(j, j) = -2.0 / (h * h);
    }
    // one-sided, second order
    d1_.row(0).head(3) << -1.5 / h, 2.0 / h, -0.5 / h;
    d1_.row(n).tail(3) << 0.5 / h, -2.0 / h, 1.5 / h;
    d2_.row(0).head(4) << 2.0 / (h * h), -5.0 / (h * h), 4.0 / (h * h), -1.0 / (h * h);
    d2_.row(n).tail(4) << -1.0 / (h * h), 4.0 / (h * h), -5.0 / (h * h), 2.0 / (h * h);
  }

  RadialScheme scheme() const { return scheme_; }
  int size() const { return static_cast<int>(s_.size()); }
  const Eigen::VectorXd& nodes() const { return s_; }
  const Eigen::MatrixXd& d1() const { return d1_; }
  const Eigen::MatrixXd& d2() const { return d2_; }

  // barycentric for Chebyshev, local cubic Lagrange for the uniform grid; exact at nodes
  Eigen::MatrixXd interpolation_matrix(const std::vector<double>& pts) const {
    if (scheme_ == RadialScheme::Chebyshev) return cheb_[0].interpolation_matrix(pts);
    const int m = size(), n = m - 1;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(pts.size()), m);
    for (size_t k = 0; k < pts.size(); ++k) {
      double u = std::clamp(pts[k], 0.0, 1.0) * n;
      int near = static_cast<int>(std::lround(u));
      if (std::abs(u - near) < 1e-12) {
        out(static_cast<Eigen::Index>(k), near) = 1.0;
        continue;
      }
      int j0 = std::clamp(static_cast<int>(std::floor(u)) - 1, 0, n - 3);
      for (int a = 0; a < 4; ++a) {
        double l = 1.0;
        for (int b = 0; b < 4; ++b)
          if (b != a) l *= (u - (j0 + b)) / static_cast<double>(a - b);
        out(static_cast<Eigen::Index>(k), j0 + a) = l;
      }
    }
    return out;
  }

 private:
  RadialScheme scheme_;
  std::vector<ChebyshevLobatto> cheb_;
  Eigen::VectorXd s_;
  Eigen::MatrixXd d1_, d2_;
};

}  // namespace dhym
