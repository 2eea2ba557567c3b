#pragma once

// n = 1 fiber solutions seen through the LYZ transform.
//
// With x-only data the fiber is a cylinder over x in [0,1): omega = g has potential g x^2 and the
// curvature alpha0 + i ddbar(b + phi) has potential F = alpha0 x^2 + (b + phi)(x). The mirror uses
// f = -F, so the section is theta(y) = -F'(x(y)) and special Lagrangian angle -theta_hat.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "dhym/functionals.hpp"
#include "dhym/syz_mirror.hpp"

namespace dhym {

// trigonometric interpolant of one x-row and its derivative
class TrigRow {
 public:
  explicit TrigRow(const std::vector<double>& v) : n_(static_cast<int>(v.size())) {
    c_.assign(static_cast<size_t>(n_), 0.0);
    for (int k = 0; k < n_; ++k) {
      std::complex<double> s = 0;
      for (int j = 0; j < n_; ++j) s += v[static_cast<size_t>(j)] * std::polar(1.0, -2 * std::numbers::pi * k * j / n_);
      c_[static_cast<size_t>(k)] = s / static_cast<double>(n_);
    }
  }
  double derivative(double x) const {
    std::complex<double> s = 0;
    for (int k = 0; k < n_; ++k) {
      int m = k <= n_ / 2 ? k : k - n_;
      if (2 * m == n_) continue;  // Nyquist carries no first derivative
      s += c_[static_cast<size_t>(k)] * std::complex<double>(0, 2 * std::numbers::pi * m) *
           std::polar(1.0, 2 * std::numbers::pi * m * x);
    }
    return s.real();
  }

 private:
  int n_;
  std::vector<std::complex<double>> c_;
};

struct FiberMirror {
  ConvexFn u;
  LagrangianSectionField section;
  double theta_tilde = 0.0;
};

inline FiberMirror fiber_mirror_section(const FiberCalculus& fc, const PotentialField& phi, double theta_hat, int nodes,
                                        double margin = 0.05) {
  if (fc.n() != 1) throw Error(ErrorCode::DimensionUnsupported, "fiber mirror needs n = 1");
  const auto& geo = fc.geometry();
  const double g = geo.omega0(0, 0).real(), a0 = geo.alpha0(0, 0).real();
  const auto& t = fc.torus();
  const int nx = t.dims()[0];
  std::vector<double> row(static_cast<size_t>(nx));
  for (size_t p = 0; p < t.size(); ++p)
    if (t.index_along(p, 1) == 0)
      row[static_cast<size_t>(t.index_along(p, 0))] = geo.background(static_cast<Eigen::Index>(p)) + phi(static_cast<Eigen::Index>(p));
  TrigRow tr(row);

  ConvexFn omega_pot{1, [g](const RVecX& x) { return g * x(0) * x(0); },
                     [g](const RVecX& x) { return RVecX::Constant(1, 2 * g * x(0)); },
                     [g](const RVecX&) { return RMatX::Constant(1, 1, 2 * g); }};
  FiberMirror fm;
  fm.u = legendre(omega_pot);
  fm.theta_tilde = -theta_hat;
  auto fx_grad = [tr, a0](const RVecX& x) { return RVecX::Constant(1, -(2 * a0 * x(0) + tr.derivative(x(0)))); };
  // polytope of x in (0, 1) is y in (0, 2g); stay margin away from its ends
  auto grid = SectionGrid::interval(margin, 2 * g - margin, nodes);
  fm.section = lyz_section(fm.u, pull_gradient(fm.u, fx_grad), grid);
  return fm;
}

}  // namespace dhym
