#pragma once

// Toric SYZ side: Legendre transforms, LYZ sections y -> theta(y) = u^{ij} df/dy_j and their phases.
//
// On the polytope interior u_ij(y) = [phi_ij(x(y))]^{-1}, so theta(y) = grad_x f at x(y) when f is
// given on the x side. A graph section has phase sum arctan(eig D theta); it is special Lagrangian
// with angle theta_tilde when that phase is constant and equal to theta_tilde.

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dhym/error.hpp"
#include "dhym/quadrature.hpp"

namespace dhym {

using RVecX = Eigen::VectorXd;
using RMatX = Eigen::MatrixXd;

struct ConvexFn {
  int m = 1;
  std::function<double(const RVecX&)> f;
  std::function<RVecX(const RVecX&)> grad;
  std::function<RMatX(const RVecX&)> hess;
  std::string provenance = "closed-form";
  RVecX center;  // interior point of the domain, Newton start for the conjugate

  RVecX start() const { return center.size() ? center : RVecX(RVecX::Zero(m)); }
};

struct MomentPolytope {
  // Delta = { y : A y + b >= 0 }
  RMatX a;
  RVecX b;
  int dim() const { return static_cast<int>(a.cols()); }
  bool interior(const RVecX& y, double margin = 0.0) const { return ((a * y + b).array() > margin).all(); }
  static MomentPolytope interval(double lo, double hi) {
    MomentPolytope p;
    p.a = RMatX(2, 1);
    p.a << 1, -1;
    p.b = RVecX(2);
    p.b << -lo, hi;
    return p;
  }
};

namespace detail {

// solves grad phi(x) = y by damped Newton on phi(x) - <x, y>
inline RVecX invert_gradient(const ConvexFn& phi, const RVecX& y, RVecX x) {
  auto obj = [&](const RVecX& z) { return phi.f(z) - z.dot(y); };
  for (int it = 0; it < 200; ++it) {
    RVecX g = phi.grad(x) - y;
    if (g.norm() < 1e-14 * (1 + y.norm())) return x;
    Eigen::LLT<RMatX> llt(phi.hess(x));
    if (llt.info() != Eigen::Success || (llt.matrixL().toDenseMatrix().diagonal().array() <= 0).any())
      throw Error(ErrorCode::NotConvex, "Hessian is not positive definite during Legendre inversion");
    RVecX step = -llt.solve(g);
    // rounding floor: the Newton step no longer moves x
    if (step.norm() <= 4e-16 * (1 + x.norm()) && g.norm() < 1e-10 * (1 + y.norm())) return x;
    double t = 1.0, f0 = obj(x);
    // near the root the objective sits at its rounding floor, so a shrinking gradient also counts
    // a trial point outside the domain of phi (a nested conjugate throws there) is a rejected step
    auto accept = [&](double tt) {
      RVecX z = x + tt * step;
      try {
        return obj(z) <= f0 + 1e-4 * tt * g.dot(step) || (phi.grad(z) - y).norm() <= (1 - 0.5 * tt) * g.norm();
      } catch (const Error&) {
        return false;
      }
    };
    while (t > 1e-12 && !accept(t)) t *= 0.5;
    if (t <= 1e-12) {
      if (g.norm() < 1e-10 * (1 + y.norm())) return x;
      throw Error(ErrorCode::NotConverged, "Legendre inversion stalled; y may lie outside the gradient image");
    }
    x += t * step;
    if (!x.allFinite()) break;
  }
  throw Error(ErrorCode::NotConverged, "Legendre inversion did not converge; y may lie outside the gradient image");
}

}  // namespace detail

// u(y) = <x(y), y> - phi(x(y)); grad u = x(y); hess u = [hess phi(x(y))]^{-1}
inline ConvexFn legendre(const ConvexFn& phi) {
  ConvexFn u;
  u.m = phi.m;
  u.provenance = "numeric-Legendre";
  u.center = phi.grad(phi.start());
  auto xof = [phi](const RVecX& y) { return detail::invert_gradient(phi, y, phi.start()); };
  u.grad = xof;
  u.f = [phi, xof](const RVecX& y) {
    RVecX x = xof(y);
    return x.dot(y) - phi.f(x);
  };
  u.hess = [phi, xof](const RVecX& y) {
    RMatX h = phi.hess(xof(y));
    Eigen::LLT<RMatX> llt(h);
    if (llt.info() != Eigen::Success) throw Error(ErrorCode::NotConvex, "Hessian is not positive definite");
    return RMatX(llt.solve(RMatX::Identity(h.rows(), h.cols())));
  };
  return u;
}

// rejects inputs whose Hessian fails to be positive definite on the supplied samples
inline void check_convex(const ConvexFn& phi, const std::vector<RVecX>& samples) {
  for (const auto& x : samples) {
    Eigen::SelfAdjointEigenSolver<RMatX> es(phi.hess(x));
    if (!(es.eigenvalues().minCoeff() > 0))
      throw Error(ErrorCode::NotConvex, "Hessian has a nonpositive eigenvalue on the sampled grid");
  }
}

inline ConvexFn quadratic_fn(int m) {
  return {m, [](const RVecX& x) { return 0.5 * x.squaredNorm(); }, [](const RVecX& x) { return x; },
          [m](const RVecX&) { return RMatX(RMatX::Identity(m, m)); }};
}

// Fubini-Study on P^1 in x = log|z|: phi = log(1 + e^{2x}), image (0, 2)
inline ConvexFn p1_potential() {
  ConvexFn p;
  p.m = 1;
  p.f = [](const RVecX& x) { return std::log1p(std::exp(2 * x(0))); };
  p.grad = [](const RVecX& x) {
    RVecX g(1);
    g(0) = 2.0 / (1.0 + std::exp(-2 * x(0)));
    return g;
  };
  p.hess = [](const RVecX& x) {
    double c = std::cosh(x(0));
    return RMatX::Constant(1, 1, 1.0 / (c * c));
  };
  return p;
}

inline double p1_symplectic_closed_form(double y) {
  return 0.5 * y * std::log(y) + 0.5 * (2 - y) * std::log(2 - y) - std::log(2.0);
}

struct SectionGrid {
  std::vector<int> dims;
  RVecX lo, hi;
  int m() const { return static_cast<int>(dims.size()); }
  size_t size() const {
    size_t s = 1;
    for (int d : dims) s *= static_cast<size_t>(d);
    return s;
  }
  double step(int a) const { return (hi(a) - lo(a)) / (dims[static_cast<size_t>(a)] - 1); }
  int index(size_t node, int a) const {
    size_t stride = 1;
    for (int k = 0; k < a; ++k) stride *= static_cast<size_t>(dims[static_cast<size_t>(k)]);
    return static_cast<int>((node / stride) % static_cast<size_t>(dims[static_cast<size_t>(a)]));
  }
  size_t neighbor(size_t node, int a, int offset) const {
    size_t stride = 1;
    for (int k = 0; k < a; ++k) stride *= static_cast<size_t>(dims[static_cast<size_t>(k)]);
    return static_cast<size_t>(static_cast<long>(node) + offset * static_cast<long>(stride));
  }
  RVecX point(size_t node) const {
    RVecX y(m());
    for (int a = 0; a < m(); ++a) y(a) = lo(a) + index(node, a) * step(a);
    return y;
  }
  static SectionGrid interval(double lo, double hi, int nodes) {
    SectionGrid g;
    g.dims = {nodes};
    g.lo = RVecX::Constant(1, lo);
    g.hi = RVecX::Constant(1, hi);
    return g;
  }
};

struct LagrangianSectionField {
  SectionGrid grid;
  std::vector<RVecX> theta;  // universal-cover values
  std::vector<RMatX> u_hess;
};

// grad_y f from a gradient on the x side: df/dy = u_ij df/dx_j
inline std::function<RVecX(const RVecX&)> pull_gradient(const ConvexFn& u, std::function<RVecX(const RVecX&)> fx_grad) {
  return [u, fx_grad](const RVecX& y) { return RVecX(u.hess(y) * fx_grad(u.grad(y))); };
}

inline LagrangianSectionField lyz_section(const ConvexFn& u, const std::function<RVecX(const RVecX&)>& fy_grad,
                                          const SectionGrid& grid) {
  if (grid.m() != u.m) throw Error(ErrorCode::DimensionMismatch, "grid and potential dimensions differ");
  LagrangianSectionField s{grid, {}, {}};
  for (size_t p = 0; p < grid.size(); ++p) {
    RVecX y = grid.point(p);
    RMatX h = u.hess(y);
    Eigen::FullPivLU<RMatX> lu(h);
    if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-300)
      throw Error(ErrorCode::SingularHessian, "symplectic-potential Hessian is singular");
    s.theta.push_back(lu.solve(fy_grad(y)));
    s.u_hess.push_back(h);
    if (!s.theta.back().allFinite()) throw Error(ErrorCode::SingularHessian, "section value is not finite");
  }
  return s;
}

struct SlagResidual {
  RVecX residual;  // sin(phase - theta_tilde)
  RVecX phase;
  double sup = 0.0;
};

namespace detail {

// second-order derivative along axis a at a node
inline double fd_derivative(const SectionGrid& g, const std::vector<RVecX>& v, size_t p, int comp, int a) {
  const int i = g.index(p, a), n = g.dims[static_cast<size_t>(a)];
  const double h = g.step(a);
  auto at = [&](int off) { return v[g.neighbor(p, a, off)](comp); };
  if (i == 0) return (-1.5 * at(0) + 2 * at(1) - 0.5 * at(2)) / h;
  if (i == n - 1) return (1.5 * at(0) - 2 * at(-1) + 0.5 * at(-2)) / h;
  return (at(1) - at(-1)) / (2 * h);
}

}  // namespace detail

inline SlagResidual slag_residual(const LagrangianSectionField& s, double theta_tilde) {
  const int m = s.grid.m();
  if (m < 1 || m > 2) throw Error(ErrorCode::DimensionUnsupported, "special-Lagrangian residual is implemented for m = 1, 2");
  for (int d : s.grid.dims)
    if (d < 3) throw Error(ErrorCode::DimensionMismatch, "need at least three nodes per axis");
  SlagResidual r;
  r.residual.resize(static_cast<Eigen::Index>(s.grid.size()));
  r.phase.resize(static_cast<Eigen::Index>(s.grid.size()));
  for (size_t p = 0; p < s.grid.size(); ++p) {
    RMatX d(m, m);  // d(i, a) = d theta_i / d y_a
    for (int i = 0; i < m; ++i)
      for (int a = 0; a < m; ++a) d(i, a) = detail::fd_derivative(s.grid, s.theta, p, i, a);
    Eigen::EigenSolver<RMatX> es(d);
    double phase = 0;
    for (int k = 0; k < m; ++k) phase += std::atan(es.eigenvalues()(k).real());
    auto i = static_cast<Eigen::Index>(p);
    r.phase(i) = phase;
    r.residual(i) = std::sin(phase - theta_tilde);
  }
  r.sup = r.residual.cwiseAbs().maxCoeff();
  return r;
}

// P^1 family: y -> -k y - delta y^2 (2 - y)(4 - 3y) / (y^2 (2 - y) + 8 e^{-2s})
inline double p1_model_family(int k, double delta, double s, double y) {
  const double q = y * y * (2 - y);
  return -k * y - delta * q * (4 - 3 * y) / (q + 8 * std::exp(-2 * s));
}
inline double p1_model_limit(int k, double delta, double y) { return -k * y - delta * (4 - 3 * y); }

// x-side potential whose LYZ section is the family: f = -k phi - delta log(e^{4x}/(1+e^{2x})^3 + e^{-2s})
inline std::function<RVecX(const RVecX&)> p1_family_x_gradient(int k, double delta, double s) {
  return [=](const RVecX& x) {
    const double e = std::exp(2 * x(0)), q = e * e / std::pow(1 + e, 3);
    const double dq = q * (4 - 6 * e / (1 + e));
    RVecX g(1);
    g(0) = -k * 2 * e / (1 + e) - delta * dq / (q + std::exp(-2 * s));
    return g;
  };
}

struct RoundtripReport {
  double sup_difference = 0.0;  // sup |theta_1 - theta_2|
  double sup_curl = 0.0;        // sup over cells of |circulation| / area of the lowered difference
  int cells = 0;
};

// theta_1 - theta_2 lowered by u must be exact: checks cell circulations with Gauss-Legendre edges.
inline RoundtripReport mirror_roundtrip(const ConvexFn& u, const std::function<RVecX(const RVecX&)>& g1,
                                        const std::function<RVecX(const RVecX&)>& g2, const SectionGrid& grid) {
  RoundtripReport r;
  auto lowered = [&](const RVecX& y) {
    RMatX h = u.hess(y);
    RVecX d = h.fullPivLu().solve(g1(y)) - h.fullPivLu().solve(g2(y));
    r.sup_difference = std::max(r.sup_difference, d.cwiseAbs().maxCoeff());
    return RVecX(h * d);
  };
  if (grid.m() == 1) {
    for (size_t p = 0; p < grid.size(); ++p) lowered(grid.point(p));
    return r;
  }
  if (grid.m() != 2) throw Error(ErrorCode::DimensionUnsupported, "roundtrip check is implemented for m = 1, 2");
  const auto gl = gauss_legendre<8>(0.0, 1.0);
  for (int i = 0; i + 1 < grid.dims[0]; ++i)
    for (int j = 0; j + 1 < grid.dims[1]; ++j) {
      const double hx = grid.step(0), hy = grid.step(1);
      RVecX c(2);
      c << grid.lo(0) + i * hx, grid.lo(1) + j * hy;
      double circ = 0;
      for (auto [t, w] : gl) {
        RVecX b(2);
        b << c(0) + t * hx, c(1);
        circ += w * hx * lowered(b)(0);
        b << c(0) + hx, c(1) + t * hy;
        circ += w * hy * lowered(b)(1);
        b << c(0) + t * hx, c(1) + hy;
        circ -= w * hx * lowered(b)(0);
        b << c(0), c(1) + t * hy;
        circ -= w * hy * lowered(b)(1);
      }
      r.sup_curl = std::max(r.sup_curl, std::abs(circ) / (hx * hy));
      ++r.cells;
    }
  return r;
}

}  // namespace dhym
