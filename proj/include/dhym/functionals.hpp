#pragma once

// CY_C, J, C, Z and V on flat-torus fibers.
//
// Conventions: a real (1,1) form b = (i/2) sum b_jk dz_j ^ dzbar_k is stored as its matrix b_jk,
// so i ddbar phi has matrix 2 d_j dbar_k phi and omega = I has unit volume on [0,1)^2n.
// Top powers are normalized by 1/n!: the integral of (omega + i alpha)^n means the integral of
// det(omega + i alpha) dV. No 2pi enters ddbar.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dhym/error.hpp"
#include "dhym/phase_core.hpp"
#include "dhym/spectral.hpp"

namespace dhym {

struct FiberGeometry {
  int n = 1;
  std::vector<int> grid;  // 2n sizes ordered x1, y1, x2, y2
  CMat omega0;
  CMat alpha0;
  Eigen::VectorXd background;  // optional potential folded into the reference alpha

  static FiberGeometry flat(int n, int npts, const CMat& omega0, const CMat& alpha0) {
    FiberGeometry g;
    g.n = n;
    g.grid.assign(2 * n, npts);
    g.omega0 = omega0;
    g.alpha0 = alpha0;
    g.validate();
    return g;
  }

  void validate() const {
    if (n < 1 || n > 2) throw Error(ErrorCode::DimensionUnsupported, "fiber dimension must be 1 or 2");
    if (static_cast<int>(grid.size()) != 2 * n) throw Error(ErrorCode::DimensionMismatch, "grid rank");
    for (int g : grid)
      if (g < 8 || g % 2) throw Error(ErrorCode::DimensionMismatch, "grid sizes must be even and >= 8");
    if (omega0.rows() != n || alpha0.rows() != n)
      throw Error(ErrorCode::DimensionMismatch, "omega0/alpha0 size");
    relative_eigenvalues(make_pencil(omega0, alpha0));  // validates positivity and symmetry
  }

  size_t nodes() const {
    size_t s = 1;
    for (int g : grid) s *= static_cast<size_t>(g);
    return s;
  }
};

using PotentialField = Eigen::VectorXd;

inline PotentialField gauge_fixed(const PotentialField& f) {
  return (f.array() - f.mean()).matrix();
}

// Complex Hessian matrices 2 d_j dbar_k f at every node.
inline std::vector<CMat> complex_hessian(const SpectralTorus& torus, int n, const Eigen::VectorXd& f) {
  auto fh = torus.forward(f);
  const int d = 2 * n;
  std::vector<std::vector<Eigen::VectorXd>> dd(d, std::vector<Eigen::VectorXd>(d));
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) {
      dd[a][b] = torus.derivative_from(fh, a, b);
      dd[b][a] = dd[a][b];
    }
  std::vector<CMat> out(torus.size(), CMat::Zero(n, n));
  for (size_t p = 0; p < torus.size(); ++p) {
    auto i = static_cast<Eigen::Index>(p);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        int xj = 2 * j, yj = 2 * j + 1, xk = 2 * k, yk = 2 * k + 1;
        out[p](j, k) = 0.5 * cplx(dd[xj][xk](i) + dd[yj][yk](i), dd[xj][yk](i) - dd[yj][xk](i));
      }
  }
  return out;
}

class FiberCalculus {
 public:
  explicit FiberCalculus(FiberGeometry g) : geom_(std::move(g)), torus_(geom_.grid) {
    geom_.validate();
    Eigen::LLT<CMat> llt(geom_.omega0);
    linv_ = llt.matrixL().solve(CMat::Identity(geom_.n, geom_.n));
    det_omega_ = geom_.omega0.determinant().real();
    if (geom_.background.size() == 0) geom_.background = Eigen::VectorXd::Zero(torus_.size());
    if (static_cast<size_t>(geom_.background.size()) != torus_.size())
      throw Error(ErrorCode::DimensionMismatch, "background size");
    base_alpha_ = curvature_of(Eigen::VectorXd::Zero(torus_.size()));
  }

  const FiberGeometry& geometry() const { return geom_; }
  const SpectralTorus& torus() const { return torus_; }
  int n() const { return geom_.n; }
  size_t nodes() const { return torus_.size(); }
  double cell() const { return 1.0 / static_cast<double>(nodes()); }

  // alpha_phi = alpha0 + i ddbar (background + phi)
  std::vector<CMat> curvature_of(const PotentialField& phi) const {
    auto h = complex_hessian(torus_, geom_.n, geom_.background + phi);
    for (auto& m : h) m += geom_.alpha0;
    return h;
  }

  RVec eigenvalues_at(const CMat& alpha) const {
    CMat c = linv_ * alpha * linv_.adjoint();
    c = 0.5 * (c + c.adjoint());
    if (geom_.n == 1) return RVec::Constant(1, c(0, 0).real());
    Eigen::SelfAdjointEigenSolver<CMat> es(c, Eigen::EigenvaluesOnly);
    RVec ev = es.eigenvalues();
    std::sort(ev.data(), ev.data() + ev.size(), std::greater<>());
    return ev;
  }

  std::vector<PhaseSpectrum> spectra(const std::vector<CMat>& alpha) const {
    std::vector<PhaseSpectrum> out(alpha.size());
    for (size_t p = 0; p < alpha.size(); ++p) out[p] = phase_and_radius(eigenvalues_at(alpha[p]));
    return out;
  }

  cplx class_integral() const {
    return (geom_.omega0 + cplx(0, 1) * geom_.alpha0).determinant();
  }

  double det_omega() const { return det_omega_; }
  const std::vector<CMat>& base_alpha() const { return base_alpha_; }

 private:
  FiberGeometry geom_;
  SpectralTorus torus_;
  CMat linv_;
  double det_omega_ = 1.0;
  std::vector<CMat> base_alpha_;
};

inline std::vector<CMat> curvature_form(const FiberCalculus& fc, const PotentialField& phi) {
  return fc.curvature_of(phi);
}

struct HatTheta {
  double principal = 0.0;
  std::optional<double> lift;
};

inline HatTheta hat_theta(const FiberCalculus& fc, const PotentialField* phi = nullptr) {
  cplx z = fc.class_integral();
  if (std::abs(z) < 1e-14) throw Error(ErrorCode::VanishingIntegral, "class integral vanishes");
  HatTheta h;
  h.principal = std::arg(z);
  if (phi) {
    auto sp = fc.spectra(fc.curvature_of(*phi));
    double lo = 1e300, hi = -1e300;
    for (const auto& s : sp) {
      lo = std::min(lo, s.theta);
      hi = std::max(hi, s.theta);
    }
    const int n = fc.n();
    for (int k = -n; k <= n; ++k) {
      double cand = h.principal + 2 * kPi * k;
      if (hi - cand < kPi / 2 && cand - lo < kPi / 2) {
        h.lift = cand;
        break;
      }
    }
    if (!h.lift) throw Error(ErrorCode::NoLift, "no lift keeps the phase within pi/2 of the class angle");
  }
  return h;
}

// Lift of the class angle into the hypercritical window ((n-1)pi/2, n pi/2), when it exists.
inline std::optional<double> hypercritical_lift(const FiberCalculus& fc) {
  double p = std::arg(fc.class_integral());
  const int n = fc.n();
  for (int k = -n; k <= n; ++k) {
    double c = p + 2 * kPi * k;
    if (c > (n - 1) * kPi / 2 && c < n * kPi / 2) return c;
  }
  return std::nullopt;
}

namespace detail {

inline cplx det_i(const CMat& omega, const CMat& alpha) {
  return (omega + cplx(0, 1) * alpha).determinant();
}

// sum over j of the normalized mixed product B1^j B2^(n-j), n <= 2
inline cplx mixed_sum(const CMat& b1, const CMat& b2) {
  const auto n = b1.rows();
  if (n == 1) return b1(0, 0) + b2(0, 0);
  cplx d1 = b1.determinant(), d2 = b2.determinant(), d12 = (b1 + b2).determinant();
  return d1 + d2 + 0.5 * (d12 - d1 - d2);
}

}  // namespace detail

inline cplx cy_closed_form(const FiberCalculus& fc, const PotentialField& phi) {
  const auto& w = fc.geometry().omega0;
  auto a = fc.curvature_of(phi);
  const auto& a0 = fc.base_alpha();
  cplx acc = 0.0;
  const cplx I(0, 1);
  for (size_t p = 0; p < fc.nodes(); ++p)
    acc += phi(static_cast<Eigen::Index>(p)) * detail::mixed_sum(w + I * a[p], w + I * a0[p]);
  return acc * fc.cell() / static_cast<double>(fc.n() + 1);
}

// int psi (omega + i alpha_phi)^n
inline cplx cy_differential(const FiberCalculus& fc, const PotentialField& phi, const PotentialField& psi) {
  const auto& w = fc.geometry().omega0;
  auto a = fc.curvature_of(phi);
  cplx acc = 0.0;
  for (size_t p = 0; p < fc.nodes(); ++p) acc += psi(static_cast<Eigen::Index>(p)) * detail::det_i(w, a[p]);
  return acc * fc.cell();
}

// Weights and derivative stencils for uniformly sampled paths.
namespace detail {

inline bool uniform(const std::vector<double>& s) {
  double h = (s.back() - s.front()) / (s.size() - 1);
  for (size_t k = 1; k < s.size(); ++k)
    if (std::abs(s[k] - s[k - 1] - h) > 1e-9 * std::max(1.0, std::abs(h))) return false;
  return h > 0;
}

// First-derivative weights at z for nodes x (Fornberg's recursion).
inline std::vector<double> fd_weights(double z, const std::vector<double>& x) {
  const size_t m = x.size();
  std::vector<std::vector<double>> c(m, std::vector<double>(2, 0.0));
  double c1 = 1.0, c4 = x[0] - z;
  c[0][0] = 1.0;
  for (size_t i = 1; i < m; ++i) {
    const size_t mn = std::min<size_t>(i, 1);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (size_t j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (size_t k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (size_t k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(m);
  for (size_t i = 0; i < m; ++i) w[i] = c[i][1];
  return w;
}

// derivative of sampled values at index k: nine-point stencils (eighth order), shifted near the ends;
// fourth-order stencils leave ~1e-5 relative error on a once-oscillating 65-sample path
template <class V>
V path_derivative(const std::vector<V>& f, size_t k, double h) {
  const size_t m = f.size(), width = std::min<size_t>(m, 9);
  const size_t start = std::min(k > width / 2 ? k - width / 2 : 0, m - width);
  std::vector<double> x(width);
  for (size_t i = 0; i < width; ++i) x[i] = (static_cast<double>(start + i) - static_cast<double>(k)) * h;
  const auto w = fd_weights(0.0, x);
  V d = w[0] * f[start];
  for (size_t i = 1; i < width; ++i) d += w[i] * f[start + i];
  return d;
}

// Quadrature weights for m uniform samples: each interval integrates the degree-7 interpolant through
// the eight nearest samples (shifted near the ends), so the rule is eighth order like the derivative.
// Short paths fall back to Simpson or the trapezoid.
inline std::vector<double> path_weights(size_t m, double h) {
  std::vector<double> w(m, h);
  constexpr size_t width = 8;
  if (m >= 2 * width) {
    std::fill(w.begin(), w.end(), 0.0);
    Eigen::Matrix<double, width, width> vt;
    for (size_t i = 0; i < width; ++i)
      for (size_t j = 0; j < width; ++j) vt(j, i) = std::pow(static_cast<double>(i), static_cast<double>(j));
    const auto lu = vt.fullPivLu();
    for (size_t k = 0; k + 1 < m; ++k) {
      const size_t start = std::min(k > 3 ? k - 3 : 0, m - width);
      const double a = static_cast<double>(k - start);
      Eigen::Matrix<double, width, 1> mom;
      for (size_t j = 0; j < width; ++j) mom(j) = (std::pow(a + 1, j + 1.0) - std::pow(a, j + 1.0)) / (j + 1.0);
      const Eigen::Matrix<double, width, 1> c = lu.solve(mom);
      for (size_t i = 0; i < width; ++i) w[start + i] += h * c(i);
    }
  } else if (m % 2 == 1 && m >= 3) {
    for (size_t k = 0; k < m; ++k) w[k] = h / 3.0 * ((k == 0 || k == m - 1) ? 1.0 : (k % 2 ? 4.0 : 2.0));
  } else {
    w.front() = w.back() = h / 2;
  }
  return w;
}

}  // namespace detail

inline cplx path_cy(const FiberCalculus& fc, const std::vector<PotentialField>& path,
                    const std::vector<double>& s) {
  if (path.size() < 3 || s.size() != path.size())
    throw Error(ErrorCode::TooFewSamples, "path needs at least three samples");
  if (!detail::uniform(s)) throw Error(ErrorCode::DimensionMismatch, "path parameters must be uniform");
  const double h = (s.back() - s.front()) / (s.size() - 1);
  auto w = detail::path_weights(path.size(), h);
  cplx acc = 0.0;
  for (size_t k = 0; k < path.size(); ++k) {
    PotentialField dot = detail::path_derivative(path, k, h);
    acc += w[k] * cy_differential(fc, path[k], dot);
  }
  return acc;
}

struct FunctionalSample {
  double s = 0.0;
  cplx cy;
  double j = 0.0;
  double c = 0.0;
  cplx z;
  double v = 0.0;
};

inline FunctionalSample functionals_from_cy(cplx cy, double theta_hat, int n, double s = 0.0, double v = 0.0) {
  FunctionalSample f;
  f.s = s;
  f.cy = cy;
  cplx rot = std::exp(cplx(0, -theta_hat)) * cy;
  f.c = rot.real();
  f.j = -rot.imag();
  f.z = std::exp(cplx(0, -n * kPi / 2)) * cy;
  f.v = v;
  return f;
}

inline double volume_functional(const FiberCalculus& fc, const PotentialField& phi) {
  auto sp = fc.spectra(fc.curvature_of(phi));
  double acc = 0.0;
  for (const auto& q : sp) acc += q.r;
  return acc * fc.det_omega() * fc.cell();
}

inline FunctionalSample functionals_at(const FiberCalculus& fc, const PotentialField& phi, double theta_hat_lift,
                                       double s = 0.0) {
  return functionals_from_cy(cy_closed_form(fc, phi), theta_hat_lift, fc.n(), s, volume_functional(fc, phi));
}

// max over nodes of Im(e^{-i n pi/2} (omega + i alpha_phi)^n); nonpositive on the almost calibrated set
inline double max_imaginary_z_density(const FiberCalculus& fc, const PotentialField& phi) {
  const auto& w = fc.geometry().omega0;
  auto a = fc.curvature_of(phi);
  cplx rot = std::exp(cplx(0, -fc.n() * kPi / 2));
  double m = -1e300;
  for (const auto& ap : a) m = std::max(m, (rot * detail::det_i(w, ap)).imag());
  return m;
}

enum class Shape { Convex, Concave, Affine, Indefinite };

inline std::string to_string(Shape s) {
  switch (s) {
    case Shape::Convex: return "convex";
    case Shape::Concave: return "concave";
    case Shape::Affine: return "affine";
    case Shape::Indefinite: return "indefinite";
  }
  return "?";
}

struct SeriesShape {
  double min_d2 = 0.0;
  double max_d2 = 0.0;
  double scale = 0.0;
  Shape shape = Shape::Indefinite;
};

struct ConvexityReport {
  SeriesShape j, c, re_z, im_z;
  double tolerance = 1e-6;
};

namespace detail {

inline SeriesShape classify(const std::vector<double>& v, double tol) {
  SeriesShape s;
  s.min_d2 = 1e300;
  s.max_d2 = -1e300;
  for (double x : v) s.scale = std::max(s.scale, std::abs(x));
  for (size_t k = 1; k + 1 < v.size(); ++k) {
    double d2 = v[k - 1] - 2 * v[k] + v[k + 1];
    s.min_d2 = std::min(s.min_d2, d2);
    s.max_d2 = std::max(s.max_d2, d2);
  }
  double t = tol * std::max(s.scale, 1e-300);
  bool cvx = s.min_d2 >= -t, ccv = s.max_d2 <= t;
  s.shape = cvx && ccv ? Shape::Affine : cvx ? Shape::Convex : ccv ? Shape::Concave : Shape::Indefinite;
  return s;
}

}  // namespace detail

inline ConvexityReport second_difference_probe(const std::vector<FunctionalSample>& samples, double tol = 1e-6) {
  if (samples.size() < 5) throw Error(ErrorCode::TooFewSamples, "need at least five samples");
  std::vector<double> s;
  for (const auto& x : samples) s.push_back(x.s);
  if (!detail::uniform(s)) throw Error(ErrorCode::DimensionMismatch, "samples must be equally spaced");
  std::vector<double> j, c, rz, iz;
  for (const auto& x : samples) {
    j.push_back(x.j);
    c.push_back(x.c);
    rz.push_back(x.z.real());
    iz.push_back(x.z.imag());
  }
  ConvexityReport r;
  r.tolerance = tol;
  r.j = detail::classify(j, tol);
  r.c = detail::classify(c, tol);
  r.re_z = detail::classify(rz, tol);
  r.im_z = detail::classify(iz, tol);
  return r;
}

}  // namespace dhym
