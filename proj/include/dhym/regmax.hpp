#pragma once

// Regularized maximum of two reals with the bump kernel exp(-1/(1-x^2)).
//
// M(t0,t1) = (t0+t1)/2 + (d/2) G((t0-t1)/d), G(u) = E|u + H|, H = h0 - h1 with h0,h1 iid bumps.
// q = rho*rho is tabulated once; G and G' come from its CDF F and first moment S by cubic
// Hermite interpolation: G(u) = u(1 - 2F(-u)) - 2S(-u), G' = 2F(u) - 1, G'' = 2q(u).

#include <cmath>
#include <vector>

#include "dhym/error.hpp"
#include "dhym/quadrature.hpp"

namespace dhym {

class RegularizedMax {
 public:
  static const RegularizedMax& instance() {
    static const RegularizedMax r;
    return r;
  }

  static double bump(double x) { return std::abs(x) < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0; }

  double rho(double x) const { return bump(x) / mass_; }

  double q(double u) const {
    u = std::abs(u);
    if (u >= 2.0) return 0.0;
    return std::max(0.0, interp(u, q_, dq_));
  }

  double G(double u) const {
    if (u >= 2.0) return u;
    if (u <= -2.0) return -u;
    return u * (1.0 - 2.0 * F(-u)) - 2.0 * S(-u);
  }
  double dG(double u) const { return 2.0 * F(u) - 1.0; }
  double d2G(double u) const { return 2.0 * q(u); }

  struct Value {
    double m = 0.0;
    double d0 = 0.5, d1 = 0.5;  // partial derivatives in t0, t1
    double dd = 0.0;            // second derivative along (1,-1)
  };

  Value eval(double t0, double t1, double delta) const {
    if (!(delta > 0.0)) throw Error(ErrorCode::DimensionMismatch, "delta must be positive");
    Value v;
    const double diff = t0 - t1, u = diff / delta;
    if (u >= 2.0) return {t0, 1.0, 0.0, 0.0};
    if (u <= -2.0) return {t1, 0.0, 1.0, 0.0};
    v.m = 0.5 * (t0 + t1) + 0.5 * delta * G(u);
    const double g1 = dG(u);
    v.d0 = 0.5 + 0.5 * g1;
    v.d1 = 0.5 - 0.5 * g1;
    v.dd = d2G(u) / (2.0 * delta);
    return v;
  }

  double operator()(double t0, double t1, double delta) const { return eval(t0, t1, delta).m; }

 private:
  static constexpr int kTable = 4096;  // nodes on [0,2]

  RegularizedMax() {
    mass_ = 0.0;
    for (auto [x, w] : composite_gauss_legendre<32>(-1.0, 1.0, 16)) mass_ += w * bump(x);
    h_ = 2.0 / kTable;
    q_.resize(kTable + 1);
    dq_.resize(kTable + 1);
    for (int i = 0; i <= kTable; ++i) {
      double u = i * h_;
      double lo = u - 1.0, hi = 1.0;  // overlap of supports of rho(h) and rho(h - u)
      double a = 0.0, b = 0.0;
      if (hi > lo) {
        for (auto [x, w] : composite_gauss_legendre<32>(lo, hi, 8)) {
          double r1 = rho(x), r2 = rho(x - u);
          a += w * r1 * r2;
          // d/du rho(x - u) = -rho'(x - u)
          double y = x - u, dr = std::abs(y) < 1.0 ? -2.0 * y / ((1 - y * y) * (1 - y * y)) * r2 : 0.0;
          b -= w * r1 * dr;
        }
      }
      q_[i] = a;
      dq_[i] = b;
    }
    // F and S on [0,2]; F(0) = 1/2, S(0) = -int_0^2 h q(h) dh by symmetry
    f_.assign(kTable + 1, 0.0);
    s_.assign(kTable + 1, 0.0);
    for (int i = 0; i < kTable; ++i) {
      double u0 = i * h_;
      double fa = 0.0, sa = 0.0;
      for (auto [x, w] : gauss_legendre<8>(u0, u0 + h_)) {
        double qq = interp(x, q_, dq_);
        fa += w * qq;
        sa += w * x * qq;
      }
      f_[i + 1] = f_[i] + fa;
      s_[i + 1] = s_[i] + sa;
    }
    const double ftot = f_.back(), stot = s_.back();
    for (int i = 0; i <= kTable; ++i) {
      f_[i] = 0.5 + f_[i] / (2.0 * ftot);  // normalizes the half mass to exactly 1/2
      s_[i] = s_[i] - stot;
    }
    mass_half_ = ftot;
  }

  double interp(double u, const std::vector<double>& v, const std::vector<double>& dv) const {
    int i = static_cast<int>(u / h_);
    if (i >= kTable) i = kTable - 1;
    double t = (u - i * h_) / h_;
    double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
    double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    return h00 * v[i] + h10 * h_ * dv[i] + h01 * v[i + 1] + h11 * h_ * dv[i + 1];
  }

  // CDF of q and first moment int_{-2}^{u} h q(h) dh, for any u
  double F(double u) const {
    if (u >= 2.0) return 1.0;
    if (u <= -2.0) return 0.0;
    if (u < 0.0) return 1.0 - F(-u);
    return interp_cdf(u);
  }
  double S(double u) const {
    if (u >= 2.0 || u <= -2.0) return 0.0;
    // S is even because h q(h) is odd and integrates to zero overall
    return interp_moment(std::abs(u));
  }

  double interp_cdf(double u) const {
    int i = static_cast<int>(u / h_);
    if (i >= kTable) i = kTable - 1;
    double t = (u - i * h_) / h_;
    double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
    double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    double c = 1.0 / (2.0 * mass_half_);
    return h00 * f_[i] + h10 * h_ * c * q_[i] + h01 * f_[i + 1] + h11 * h_ * c * q_[i + 1];
  }
  double interp_moment(double u) const {
    int i = static_cast<int>(u / h_);
    if (i >= kTable) i = kTable - 1;
    double t = (u - i * h_) / h_;
    double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
    double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    double u0 = i * h_, u1 = u0 + h_;
    return h00 * s_[i] + h10 * h_ * u0 * q_[i] + h01 * s_[i + 1] + h11 * h_ * u1 * q_[i + 1];
  }

  double mass_ = 1.0, mass_half_ = 0.5, h_ = 0.0;
  std::vector<double> q_, dq_, f_, s_;
};

inline double regularized_max(double t0, double t1, double delta) {
  return RegularizedMax::instance()(t0, t1, delta);
}

}  // namespace dhym
