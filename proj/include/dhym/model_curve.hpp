#pragma once

// Model-curve rays Phi(s) = phi0 + delta psi(s) on flat fibers, s = -log|t|.
//
// Point flag ideal (z_1..z_n) + (t):  psi = (1/2pi) log(e^{-2s} + rho(x)),
//   rho = sum_j (sin^2 pi x_j + sin^2 pi y_j) / pi^2, a periodic stand-in for |z|^2 near the origin.
// Trivial ideal (t^r):               psi = -r s / pi.
// Everything is analytic in x, so slopes can be integrated on meshes graded toward the center.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "dhym/error.hpp"
#include "dhym/functionals.hpp"
#include "dhym/phase_core.hpp"
#include "dhym/quadrature.hpp"

namespace dhym {

struct FlagIdeal {
  enum class Kind { Point, Trivial };
  Kind kind = Kind::Point;
  int r = 1;
};

// 1D rule on [-1/2, 1/2) with geometric panels toward 0.
inline std::vector<std::pair<double, double>> graded_rule(int levels = 34, double ratio = 0.5) {
  std::vector<std::pair<double, double>> out;
  double outer = 0.5;
  for (int k = 0; k < levels; ++k) {
    double inner = outer * ratio;
    for (double sgn : {1.0, -1.0})
      for (auto [x, w] : gauss_legendre<12>(inner, outer)) out.emplace_back(sgn * x, w);
    outer = inner;
  }
  auto c = gauss_legendre<12>(-outer, outer);
  out.insert(out.end(), c.begin(), c.end());
  return out;
}

class ModelCurve {
 public:
  // omega0, alpha0 constant; phi0 = 0 so alpha0 is the base form
  ModelCurve(int n, CMat omega0, CMat alpha0, FlagIdeal ideal, double delta)
      : n_(n), omega_(std::move(omega0)), alpha_(std::move(alpha0)), ideal_(ideal), delta_(delta) {
    if (n_ < 1 || n_ > 2) throw Error(ErrorCode::DimensionUnsupported, "model curves are built on n = 1 or 2 fibers");
    if (delta_ <= 0) throw Error(ErrorCode::DeltaTooLarge, "delta must be positive");
    relative_eigenvalues(make_pencil(omega_, alpha_));
  }

  int n() const { return n_; }
  double delta() const { return delta_; }

  static double rho(const std::vector<double>& x) {
    double r = 0;
    for (double v : x) r += std::pow(std::sin(std::numbers::pi * v), 2);
    return r / (std::numbers::pi * std::numbers::pi);
  }

  double psi(const std::vector<double>& x, double s) const {
    if (ideal_.kind == FlagIdeal::Kind::Trivial) return -ideal_.r * s / std::numbers::pi;
    return std::log(std::exp(-2 * s) + rho(x)) / (2 * std::numbers::pi);
  }
  double dpsi_ds(const std::vector<double>& x, double s) const {
    if (ideal_.kind == FlagIdeal::Kind::Trivial) return -ideal_.r / std::numbers::pi;
    double tau = std::exp(-2 * s);
    return -tau / (tau + rho(x)) / std::numbers::pi;
  }

  // matrix of i ddbar psi, same layout as complex_hessian
  CMat ddbar_psi(const std::vector<double>& x, double s) const {
    CMat h = CMat::Zero(n_, n_);
    if (ideal_.kind == FlagIdeal::Kind::Trivial) return h;
    const double pi = std::numbers::pi, tau = std::exp(-2 * s), q = tau + rho(x);
    const int d = 2 * n_;
    Eigen::VectorXd g(d);
    Eigen::MatrixXd hr(d, d);
    for (int a = 0; a < d; ++a) g(a) = std::sin(2 * pi * x[static_cast<size_t>(a)]) / pi;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        hr(a, b) = ((a == b ? 2 * std::cos(2 * pi * x[static_cast<size_t>(a)]) : 0.0) / q - g(a) * g(b) / (q * q)) /
                   (2 * pi);
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k) {
        int xj = 2 * j, yj = 2 * j + 1, xk = 2 * k, yk = 2 * k + 1;
        h(j, k) = 0.5 * cplx(hr(xj, xk) + hr(yj, yk), hr(xj, yk) - hr(yj, xk));
      }
    return h;
  }

  CMat alpha_at(const std::vector<double>& x, double s) const { return alpha_ + delta_ * ddbar_psi(x, s); }
  double phase_at(const std::vector<double>& x, double s) const {
    return phase_and_radius(make_pencil(omega_, alpha_at(x, s))).theta;
  }

  // Phi(s) on the fiber grid (coordinates in [0,1), centered at the origin node)
  PotentialField field(const FiberGeometry& g, double s) const {
    SpectralTorus t(g.grid);
    PotentialField f(static_cast<Eigen::Index>(t.size()));
    for (size_t p = 0; p < t.size(); ++p) f(static_cast<Eigen::Index>(p)) = delta_ * psi(coords(t, p), s);
    return f;
  }

  // d/ds CY = int dPhi/ds det(omega + i alpha_Phi) dV, n = 1 only (graded 2D tensor rule)
  cplx cy_slope(double s) const {
    if (n_ != 1) throw Error(ErrorCode::DimensionUnsupported, "slope quadrature is implemented for n = 1");
    if (ideal_.kind == FlagIdeal::Kind::Trivial)
      return delta_ * (-ideal_.r / std::numbers::pi) * (omega_ + cplx(0, 1) * alpha_).determinant();
    static const auto rule = graded_rule();
    cplx acc = 0;
    std::vector<double> x(2);
    for (auto [u, wu] : rule)
      for (auto [v, wv] : rule) {
        x[0] = u;
        x[1] = v;
        acc += wu * wv * delta_ * dpsi_ds(x, s) * (omega_ + cplx(0, 1) * alpha_at(x, s)).determinant();
      }
    return acc;
  }

  // smallest margin of the branch condition |Theta - theta_hat| < pi/2 over grid and graded nodes
  double branch_margin(double s, double theta_hat, int grid = 64) const {
    double m = 1e300;
    auto visit = [&](const std::vector<double>& x) {
      m = std::min(m, std::numbers::pi / 2 - std::abs(phase_at(x, s) - theta_hat));
    };
    std::vector<int> dims(static_cast<size_t>(2 * n_), grid);
    SpectralTorus t(dims);
    for (size_t p = 0; p < t.size(); ++p) visit(coords(t, p));
    if (n_ == 1) {
      auto r = graded_rule(20);
      std::vector<double> x(2);
      for (auto [u, wu] : r)
        for (double v : {0.0, u, 0.5}) {
          x = {u, v};
          visit(x);
        }
    }
    return m;
  }

  static std::vector<double> coords(const SpectralTorus& t, size_t p) {
    std::vector<double> x(static_cast<size_t>(t.rank()));
    for (int a = 0; a < t.rank(); ++a) {
      double c = t.coord(p, a);
      x[static_cast<size_t>(a)] = c >= 0.5 ? c - 1.0 : c;
    }
    return x;
  }

 private:
  int n_;
  CMat omega_, alpha_;
  FlagIdeal ideal_;
  double delta_;
};

struct SliceCheck {
  double s = 0.0;
  double margin = 0.0;
};

struct DeltaScan {
  double delta_max = 0.0;
  double exit_s = 0.0;  // first slice leaving the branch just above delta_max
  std::vector<SliceCheck> slices;
};

inline std::vector<double> slice_schedule(double s_max, int count = 17) {
  std::vector<double> s;
  for (int k = 0; k < count; ++k) s.push_back(s_max * k / (count - 1));
  return s;
}

// Verifies every slice of the ray; throws DeltaTooLarge with the first exit.
inline std::vector<SliceCheck> verify_ray(const ModelCurve& mc, double theta_hat, const std::vector<double>& s_list) {
  std::vector<SliceCheck> out;
  for (double s : s_list) {
    double m = mc.branch_margin(s, theta_hat);
    if (!(m > 0))
      throw Error(ErrorCode::DeltaTooLarge, "model-curve slice leaves the branch at s = " + std::to_string(s));
    out.push_back({s, m});
  }
  return out;
}

inline DeltaScan delta_max_scan(int n, const CMat& omega0, const CMat& alpha0, FlagIdeal ideal, double theta_hat,
                                double s_max, double hi = 4.0, int iterations = 40) {
  auto s_list = slice_schedule(s_max);
  auto exits = [&](double d, double* where) {
    ModelCurve mc(n, omega0, alpha0, ideal, d);
    for (double s : s_list)
      if (!(mc.branch_margin(s, theta_hat, 32) > 0)) {
        if (where) *where = s;
        return true;
      }
    return false;
  };
  DeltaScan r;
  double lo = 0.0;
  if (!exits(hi, &r.exit_s)) {
    r.delta_max = hi;
  } else {
    for (int k = 0; k < iterations; ++k) {
      double mid = 0.5 * (lo + hi);
      double where = 0;
      if (exits(mid, &where)) {
        hi = mid;
        r.exit_s = where;
      } else {
        lo = mid;
      }
    }
    r.delta_max = lo;
  }
  return r;
}

inline PotentialField model_curve_potential(const FiberGeometry& g, FlagIdeal ideal, double delta, double s,
                                            double theta_hat) {
  ModelCurve mc(g.n, g.omega0, g.alpha0, ideal, delta);
  verify_ray(mc, theta_hat, slice_schedule(s));
  return mc.field(g, s);
}

}  // namespace dhym
