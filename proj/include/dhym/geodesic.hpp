#pragma once

// epsilon-regularized geodesics on fiber x annulus, n = 1 fiber, data independent of y.
//
// Scaled annulus e^{-1} < |t| < 1, s = -log|t| in [0,1], metric omega + eps^2 i dt^dtbar.
// With S^1 symmetry the normalized 2x2 matrix of alpha_Phi has
//   a = Phi_ss / w,  |b|^2 = Phi_sx^2 / (2 g w),  c = (alpha_bg + Phi_xx / 2) / g,  w = 4 eps^2 e^{-2s},
// and the phase is F = atan2(a + c, 1 - ac + |b|^2), which lies in (0, pi) exactly when a + c > 0.
// Newton runs on the polynomial form
//   E = P Phi_ss + w Q - sin(h) Phi_sx^2 / (2g),  P = cos h + c sin h,  Q = c cos h - sin h,
// which is a positive multiple of sin(F - h). x is Fourier; s uses RadialGrid.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "dhym/dhym_solver.hpp"
#include "dhym/error.hpp"
#include "dhym/functionals.hpp"
#include "dhym/krylov.hpp"
#include "dhym/radial.hpp"
#include "dhym/regmax.hpp"
#include "dhym/spectral.hpp"

namespace dhym {

struct AnnulusGrid {
  FiberGeometry geometry;  // n = 1
  int s_nodes = 65;
  RadialScheme radial = RadialScheme::FiniteDifference;
  double epsilon = 0.1;
  PotentialField phi0, phi1;
};

struct GeodesicEstimates {
  double osc = 0.0;
  double grad_x = 0.0;   // sup |d^X phi|
  double hess_x = 0.0;   // sup |d^X dbar^X phi|
  double mixed = 0.0;    // sup |d_t dbar^X phi|
  double time = 0.0;     // sup |d_t d_tbar phi|
  double mixed_scaled = 0.0;  // mixed * eps
  double time_scaled = 0.0;   // time * eps^2
  double sup_phi = 0.0;
  double max_boundary = 0.0;
};

struct GeodesicOptions {
  double tol = 1e-8;
  int max_iter = 30;
  int max_backtracks = 40;
  double damping = 0.5;
  double gmres_tol = 1e-10;
  int uniform_samples = 17;  // s samples for the functional series
  bool allow_continuation = true;
};

struct GeodesicSolution {
  double epsilon = 0.0;
  double theta_hat = 0.0;
  Eigen::VectorXd s;    // radial nodes
  Eigen::MatrixXd phi;  // Nx x Ns
  SolverRun run;
  GeodesicEstimates estimates;
  double start_gap = 0.0;  // min(phi - initial subsolution); nonnegative by comparison
  std::vector<FunctionalSample> functionals;
};

namespace detail {

inline Eigen::VectorXd x_profile(const FiberGeometry& g, const PotentialField& f, const char* name) {
  const int nx = g.grid[0], ny = g.grid[1];
  if (f.size() != static_cast<Eigen::Index>(nx) * ny)
    throw Error(ErrorCode::DimensionMismatch, std::string(name) + " does not match the fiber grid");
  Eigen::VectorXd p = f.head(nx);
  double scale = std::max(1.0, p.cwiseAbs().maxCoeff());
  for (int j = 1; j < ny; ++j)
    if ((f.segment(static_cast<Eigen::Index>(j) * nx, nx) - p).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw Error(ErrorCode::UnsupportedGeometry, std::string(name) + " depends on y; only x-dependent data are supported");
  return p;
}

inline PotentialField fiber_field(const FiberGeometry& g, const Eigen::VectorXd& profile) {
  const int nx = g.grid[0], ny = g.grid[1];
  PotentialField f(static_cast<Eigen::Index>(nx) * ny);
  for (int j = 0; j < ny; ++j) f.segment(static_cast<Eigen::Index>(j) * nx, nx) = profile;
  return f;
}

inline Eigen::MatrixXd fourier_matrix(int n, int order) {
  SpectralTorus t({n});
  Eigen::MatrixXd d(n, n);
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd e = Eigen::VectorXd::Unit(n, k);
    d.col(k) = order == 1 ? t.derivative(e, 0) : t.derivative(e, 0, 0);
  }
  return d;
}

struct Derivs {
  Eigen::MatrixXd x, xx, s, ss, sx;
};

}  // namespace detail

class AnnulusOperator {
 public:
  AnnulusOperator(const AnnulusGrid& grid, double theta_hat)
      : grid_(grid), radial_(grid.s_nodes, grid.radial), eps_(grid.epsilon) {
    const auto& g = grid.geometry;
    if (g.n != 1) throw Error(ErrorCode::DimensionUnsupported, "geodesic solver supports n = 1 fibers");
    g.validate();
    if (grid.s_nodes < 9) throw Error(ErrorCode::DimensionMismatch, "need at least 9 s nodes");
    if (!(eps_ > 0)) throw Error(ErrorCode::DimensionMismatch, "epsilon must be positive");
    nx_ = g.grid[0];
    ns_ = grid.s_nodes;
    gm_ = g.omega0(0, 0).real();
    dx_ = detail::fourier_matrix(nx_, 1);
    dxx_ = detail::fourier_matrix(nx_, 2);
    p0_ = detail::x_profile(g, grid.phi0, "phi0");
    p1_ = detail::x_profile(g, grid.phi1, "phi1");
    Eigen::VectorXd bg = g.background.size() ? detail::x_profile(g, g.background, "background")
                                              : Eigen::VectorXd::Zero(nx_);
    abg_ = (dxx_ * bg * 0.5).array() + g.alpha0(0, 0).real();
    w_.resize(ns_);
    for (int j = 0; j < ns_; ++j) w_(j) = 4.0 * eps_ * eps_ * std::exp(-2.0 * radial_.nodes()(j));
    set_target(Eigen::MatrixXd::Constant(nx_, ns_, theta_hat));
  }

  int nx() const { return nx_; }
  int ns() const { return ns_; }
  double g() const { return gm_; }
  double epsilon() const { return eps_; }
  const RadialGrid& radial() const { return radial_; }
  const Eigen::VectorXd& profile0() const { return p0_; }
  const Eigen::VectorXd& profile1() const { return p1_; }
  const Eigen::VectorXd& background_alpha() const { return abg_; }
  const Eigen::VectorXd& weight() const { return w_; }
  const Eigen::MatrixXd& dx() const { return dx_; }
  const Eigen::MatrixXd& dxx() const { return dxx_; }
  const Eigen::MatrixXd& target() const { return h_; }
  Eigen::Index unknowns() const { return static_cast<Eigen::Index>(nx_) * (ns_ - 2); }

  void set_target(const Eigen::MatrixXd& h) {
    h_ = h;
    sin_h_ = h.array().sin();
    cos_h_ = h.array().cos();
  }

  detail::Derivs derivs(const Eigen::MatrixXd& phi) const {
    detail::Derivs d;
    d.x = dx_ * phi;
    d.xx = dxx_ * phi;
    d.s = phi * radial_.d1().transpose();
    d.ss = phi * radial_.d2().transpose();
    d.sx = d.x * radial_.d1().transpose();
    return d;
  }

  Eigen::MatrixXd c_field(const detail::Derivs& d) const {
    return ((0.5 * d.xx).colwise() + abg_) / gm_;
  }

  // phase F and trace a + c at every node
  void phase(const Eigen::MatrixXd& phi, Eigen::MatrixXd& f, Eigen::MatrixXd& tr) const {
    auto d = derivs(phi);
    Eigen::MatrixXd c = c_field(d);
    f.resize(nx_, ns_);
    tr.resize(nx_, ns_);
    for (int j = 0; j < ns_; ++j)
      for (int i = 0; i < nx_; ++i) {
        double a = d.ss(i, j) / w_(j), b2 = d.sx(i, j) * d.sx(i, j) / (2 * gm_ * w_(j));
        tr(i, j) = a + c(i, j);
        f(i, j) = std::atan2(a + c(i, j), 1.0 - a * c(i, j) + b2);
      }
  }

  // sup over interior nodes of |F - h|; +inf when the trace is not positive somewhere
  double residual(const Eigen::MatrixXd& phi) const {
    Eigen::MatrixXd f, tr;
    phase(phi, f, tr);
    double r = 0.0;
    for (int j = 1; j < ns_ - 1; ++j)
      for (int i = 0; i < nx_; ++i) {
        if (!(tr(i, j) > 0.0)) return std::numeric_limits<double>::infinity();
        r = std::max(r, std::abs(f(i, j) - h_(i, j)));
      }
    return r;
  }

  Eigen::MatrixXd poly_residual(const Eigen::MatrixXd& phi) const {
    auto d = derivs(phi);
    Eigen::MatrixXd c = c_field(d), e(nx_, ns_);
    for (int j = 0; j < ns_; ++j)
      for (int i = 0; i < nx_; ++i) {
        double sh = sin_h_(i, j), ch = cos_h_(i, j);
        double p = ch + c(i, j) * sh, q = c(i, j) * ch - sh;
        e(i, j) = p * d.ss(i, j) + w_(j) * q - sh * d.sx(i, j) * d.sx(i, j) / (2 * gm_);
      }
    return e;
  }

  struct Coefficients {
    Eigen::MatrixXd ss, xx, sx;
  };

  Coefficients linearize(const Eigen::MatrixXd& phi) const {
    auto d = derivs(phi);
    Eigen::MatrixXd c = c_field(d);
    Coefficients k{Eigen::MatrixXd(nx_, ns_), Eigen::MatrixXd(nx_, ns_), Eigen::MatrixXd(nx_, ns_)};
    for (int j = 0; j < ns_; ++j)
      for (int i = 0; i < nx_; ++i) {
        double sh = sin_h_(i, j), ch = cos_h_(i, j);
        k.ss(i, j) = ch + c(i, j) * sh;
        k.xx(i, j) = (sh * d.ss(i, j) + w_(j) * ch) / (2 * gm_);
        k.sx(i, j) = -sh * d.sx(i, j) / gm_;
      }
    return k;
  }

  Eigen::MatrixXd embed(const Eigen::VectorXd& v) const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nx_, ns_);
    m.middleCols(1, ns_ - 2) = Eigen::Map<const Eigen::MatrixXd>(v.data(), nx_, ns_ - 2);
    return m;
  }
  Eigen::VectorXd interior(const Eigen::MatrixXd& m) const {
    Eigen::MatrixXd in = m.middleCols(1, ns_ - 2);
    return Eigen::Map<const Eigen::VectorXd>(in.data(), in.size());
  }

  Eigen::VectorXd apply_jacobian(const Coefficients& k, const Eigen::VectorXd& v) const {
    auto d = derivs(embed(v));
    Eigen::MatrixXd out = k.ss.cwiseProduct(d.ss) + k.xx.cwiseProduct(d.xx) + k.sx.cwiseProduct(d.sx);
    return interior(out);
  }

  // second-order finite differences on the same nodes, used only as a preconditioner
  Eigen::SparseMatrix<double> fd_jacobian(const Coefficients& k) const {
    const auto& s = radial_.nodes();
    const double hx = 1.0 / nx_;
    std::vector<Eigen::Triplet<double>> tr;
    auto id = [&](int i, int j) { return ((i + nx_) % nx_) + nx_ * (j - 1); };
    for (int j = 1; j < ns_ - 1; ++j) {
      double hm = s(j) - s(j - 1), hp = s(j + 1) - s(j);
      double cm = 2.0 / (hm * (hm + hp)), c0 = -2.0 / (hm * hp), cp = 2.0 / (hp * (hm + hp));
      double dm = -hp / (hm * (hm + hp)), d0 = (hp - hm) / (hm * hp), dp = hm / (hp * (hm + hp));
      for (int i = 0; i < nx_; ++i) {
        int r = id(i, j);
        double kss = k.ss(i, j), kxx = k.xx(i, j), ksx = k.sx(i, j);
        tr.emplace_back(r, r, kss * c0 - 2.0 * kxx / (hx * hx));
        if (j - 1 >= 1) tr.emplace_back(r, id(i, j - 1), kss * cm);
        if (j + 1 <= ns_ - 2) tr.emplace_back(r, id(i, j + 1), kss * cp);
        tr.emplace_back(r, id(i + 1, j), kxx / (hx * hx));
        tr.emplace_back(r, id(i - 1, j), kxx / (hx * hx));
        for (int dj : {-1, 0, 1}) {
          int jj = j + dj;
          if (jj < 1 || jj > ns_ - 2) continue;
          double ws = dj < 0 ? dm : dj == 0 ? d0 : dp;
          tr.emplace_back(r, id(i + 1, jj), ksx * ws / (2 * hx));
          tr.emplace_back(r, id(i - 1, jj), -ksx * ws / (2 * hx));
        }
      }
    }
    Eigen::SparseMatrix<double> m(unknowns(), unknowns());
    m.setFromTriplets(tr.begin(), tr.end());
    return m;
  }

  Eigen::MatrixXd linear_interpolant() const {
    Eigen::MatrixXd phi(nx_, ns_);
    for (int j = 0; j < ns_; ++j) {
      double s = radial_.nodes()(j);
      phi.col(j) = (1 - s) * p0_ + s * p1_;
    }
    return phi;
  }

  // smooth strict subsolution (1-s)phi0 + s phi1 + (kappa/2)(s^2 - s)
  Eigen::MatrixXd quadratic_start(double* kappa_out = nullptr) const {
    Eigen::VectorXd dpx = dx_ * (p1_ - p0_);
    Eigen::VectorXd c0 = ((0.5 * (dxx_ * p0_)) + abg_) / gm_, c1 = ((0.5 * (dxx_ * p1_)) + abg_) / gm_;
    double pmin = 1e300, qneg = 0.0, cneg = 0.0, sh = 0.0;
    for (int i = 0; i < nx_; ++i)
      for (double c : {c0(i), c1(i)}) {
        double hh = h_(i, 0);  // boundary targets
        double p = std::cos(hh) + c * std::sin(hh), q = c * std::cos(hh) - std::sin(hh);
        pmin = std::min(pmin, p);
        qneg = std::max(qneg, -q);
        cneg = std::max(cneg, -c);
        sh = std::max(sh, std::sin(hh));
      }
    for (int j = 0; j < ns_; ++j)
      for (int i = 0; i < nx_; ++i) sh = std::max(sh, std::sin(h_(i, j)));
    if (!(pmin > 0))
      throw Error(ErrorCode::SliceExitsH, "boundary data are not almost calibrated for the target angle");
    double wmax = w_.maxCoeff();
    double kappa = 1.5 * (sh * dpx.cwiseAbs2().maxCoeff() / (2 * gm_) + wmax * qneg) / pmin + 0.1;
    kappa = std::max(kappa, 1.5 * wmax * cneg + 0.1);
    if (kappa_out) *kappa_out = kappa;
    Eigen::MatrixXd phi = linear_interpolant();
    for (int j = 0; j < ns_; ++j) {
      double s = radial_.nodes()(j);
      phi.col(j).array() += 0.5 * kappa * (s * s - s);
    }
    return phi;
  }

  GeodesicEstimates estimates(const Eigen::MatrixXd& phi) const {
    auto d = derivs(phi);
    GeodesicEstimates e;
    e.osc = phi.maxCoeff() - phi.minCoeff();
    e.sup_phi = phi.maxCoeff();
    e.max_boundary = std::max(p0_.maxCoeff(), p1_.maxCoeff());
    e.grad_x = d.x.cwiseAbs().maxCoeff() / std::sqrt(2 * gm_);
    e.hess_x = (0.5 * d.xx).cwiseAbs().maxCoeff() / gm_;
    for (int j = 0; j < ns_; ++j) {
      double t = std::exp(-radial_.nodes()(j));
      for (int i = 0; i < nx_; ++i) {
        e.time = std::max(e.time, std::abs(d.ss(i, j)) / w_(j));
        e.mixed = std::max(e.mixed, std::abs(d.sx(i, j)) / std::sqrt(2 * gm_ * w_(j)));
        (void)t;
      }
    }
    e.mixed_scaled = e.mixed * eps_;
    e.time_scaled = e.time * eps_ * eps_;
    return e;
  }

  // every s slice must stay almost calibrated: |arctan c - h| < pi/2
  void check_slices(const Eigen::MatrixXd& phi) const {
    Eigen::MatrixXd c = c_field(derivs(phi));
    for (int j = 0; j < ns_; ++j)
      for (int i = 0; i < nx_; ++i)
        if (!(std::abs(std::atan(c(i, j)) - h_(i, j)) < kPi / 2))
          throw Error(ErrorCode::SliceExitsH, "slice leaves the almost calibrated set at s index " + std::to_string(j));
  }

 private:
  AnnulusGrid grid_;
  RadialGrid radial_;
  double eps_;
  int nx_ = 0, ns_ = 0;
  double gm_ = 1.0;
  Eigen::MatrixXd dx_, dxx_;
  Eigen::VectorXd p0_, p1_, abg_, w_;
  Eigen::MatrixXd h_, sin_h_, cos_h_;
};

namespace detail {

// Damped Newton from phi; returns false when the line search stalls or the iteration budget runs out.
inline bool geodesic_newton(const AnnulusOperator& op, Eigen::MatrixXd& phi, const GeodesicOptions& opt,
                            SolverRun& run) {
  double res = op.residual(phi);
  if (!std::isfinite(res)) return false;
  if (run.residuals.empty()) run.residuals.push_back(res);
  for (int it = 0; it < opt.max_iter && res >= opt.tol; ++it) {
    auto k = op.linearize(phi);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    auto fd = op.fd_jacobian(k);
    lu.compute(fd);
    if (lu.info() != Eigen::Success) return false;
    OperatorRef a{[&](const Eigen::VectorXd& v) { return op.apply_jacobian(k, v); }, op.unknowns()};
    PreconditionerRef m{[&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return lu.solve(v); }};
    Eigen::VectorXd rhs = -op.interior(op.poly_residual(phi));
    auto kr = gmres_solve(a, m, rhs, opt.gmres_tol, 600, 120);
    Eigen::MatrixXd step = op.embed(kr.x);
    double lambda = 1.0;
    bool ok = false;
    int bt = 0;
    for (; bt <= opt.max_backtracks; ++bt, lambda *= opt.damping) {
      Eigen::MatrixXd cand = phi + lambda * step;
      double rc = op.residual(cand);
      if (rc < (1.0 - 1e-4 * lambda) * res) {
        phi = cand;
        res = rc;
        ok = true;
        break;
      }
    }
    ++run.iterations;
    run.backtracks.push_back(bt);
    if (!ok) return false;
    run.residuals.push_back(res);
  }
  return res < opt.tol;
}

inline std::vector<FunctionalSample> geodesic_functionals(const AnnulusGrid& grid, const AnnulusOperator& op,
                                                          const Eigen::MatrixXd& phi, double theta_hat,
                                                          int samples) {
  FiberCalculus fc(grid.geometry);
  std::vector<double> su;
  for (int k = 0; k < samples; ++k) su.push_back(static_cast<double>(k) / (samples - 1));
  Eigen::MatrixXd interp = op.radial().interpolation_matrix(su);
  Eigen::MatrixXd pu = phi * interp.transpose();
  std::vector<FunctionalSample> out;
  for (int k = 0; k < samples; ++k)
    out.push_back(functionals_at(fc, fiber_field(grid.geometry, pu.col(k)), theta_hat, su[static_cast<size_t>(k)]));
  return out;
}

}  // namespace detail

inline GeodesicSolution solve_epsilon_geodesic(const AnnulusGrid& grid, double theta_hat,
                                               const GeodesicOptions& opt = {}) {
  Stopwatch sw;
  AnnulusOperator op(grid, theta_hat);
  GeodesicSolution sol;
  sol.epsilon = grid.epsilon;
  sol.theta_hat = theta_hat;
  sol.s = op.radial().nodes();
  Eigen::MatrixXd start = op.quadratic_start();
  Eigen::MatrixXd phi = start;
  bool ok = detail::geodesic_newton(op, phi, opt, sol.run);
  if (!ok && opt.allow_continuation) {
    // homotopy in the target: start from the phase of the subsolution and move to theta_hat
    sol.run.note = "continuation";
    phi = start;
    Eigen::MatrixXd f0, tr;
    op.phase(start, f0, tr);
    Eigen::MatrixXd target = op.target();
    AnnulusOperator hop(grid, theta_hat);
    for (double tau : {0.25, 0.5, 0.75, 1.0}) {
      hop.set_target((1 - tau) * f0 + tau * target);
      ok = detail::geodesic_newton(hop, phi, opt, sol.run);
      if (!ok) break;
    }
  }
  sol.run.converged = ok;
  sol.run.wall_seconds = sw.seconds();
  if (!ok) throw Error(ErrorCode::NotConverged, "epsilon geodesic did not converge at eps = " +
                                                    std::to_string(grid.epsilon));
  op.check_slices(phi);
  sol.phi = phi;
  sol.estimates = op.estimates(phi);
  sol.start_gap = (phi - start).minCoeff();
  sol.functionals = detail::geodesic_functionals(grid, op, phi, theta_hat, opt.uniform_samples);
  return sol;
}

// ---- subsolution bundle ----

struct SubsolutionBundle {
  Eigen::MatrixXd psi0, psi1, underline_phi;  // Nx x Ns on the Lobatto nodes
  Eigen::MatrixXd phase;                      // F of the glued potential
  double A0 = 0, A1 = 0, C0 = 0, C1 = 0, delta_max = 0;
  double min_margin = 0.0;     // min(F - h) - eta1/2
  double boundary_error = 0.0; // sup |underline - phi_i| on the two rings
  double radial_d1 = 0.0;      // sup |d_{|t|} underline| (scaled annulus)
  double radial_d2 = 0.0;      // sup |d^2_{|t|} underline|
};

inline SubsolutionBundle build_subsolution(const AnnulusGrid& grid, double h, double eta1) {
  AnnulusOperator op(grid, h);
  const int nx = op.nx(), ns = op.ns();
  const double g = op.g(), eps = grid.epsilon;
  const auto& s = op.radial().nodes();
  const auto& dx = op.dx();
  const auto& dxx = op.dxx();
  Eigen::VectorXd p0 = op.profile0(), p1 = op.profile1();
  Eigen::VectorXd c0 = ((0.5 * (dxx * p0)) + op.background_alpha()) / g;
  Eigen::VectorXd c1 = ((0.5 * (dxx * p1)) + op.background_alpha()) / g;
  for (int i = 0; i < nx; ++i)
    for (double c : {c0(i), c1(i)}) {
      double th = std::atan(c);
      if (th < eta1 || th < h - kPi / 2 + eta1)
        throw Error(ErrorCode::StructuralFailure, "boundary phase violates the structural window by eta1");
    }
  SubsolutionBundle b;
  b.A0 = b.A1 = std::tan(kPi / 2 - eta1 / 2) * (1 + 1e-6);
  b.C0 = b.C1 = (p0 - p1).cwiseAbs().maxCoeff() + 1.0;
  const double e2 = std::exp(-2.0);
  b.delta_max = std::min(0.5, 0.5 * (b.C0 + 1.0 - b.A1 * eps * eps));
  if (!(b.delta_max > 0))
    throw Error(ErrorCode::StructuralFailure, "epsilon too large for the barrier constants");
  const double d = b.delta_max;
  const auto& rm = RegularizedMax::instance();
  b.psi0.resize(nx, ns);
  b.psi1.resize(nx, ns);
  b.underline_phi.resize(nx, ns);
  b.phase.resize(nx, ns);
  Eigen::VectorXd p0x = dx * p0, p1x = dx * p1;
  b.min_margin = 1e300;
  for (int j = 0; j < ns; ++j) {
    double sj = s(j), ex = std::exp(-2 * sj), w = op.weight()(j);
    double f0 = b.A0 * eps * eps * (ex - 1) - 2 * b.C0 * sj, f1 = b.A1 * eps * eps * (ex - e2) - b.C1 * (2 - 2 * sj);
    double f0s = -2 * b.A0 * eps * eps * ex - 2 * b.C0, f1s = -2 * b.A1 * eps * eps * ex + 2 * b.C1;
    double f0ss = 4 * b.A0 * eps * eps * ex, f1ss = 4 * b.A1 * eps * eps * ex;
    for (int i = 0; i < nx; ++i) {
      double t0 = p0(i) + f0, t1 = p1(i) + f1;
      b.psi0(i, j) = t0;
      b.psi1(i, j) = t1;
      auto v = rm.eval(t0, t1, d);
      b.underline_phi(i, j) = v.m;
      // normalized matrix: convex combination of diag(A_i, c_i) plus the rank-one term
      double ds_ = f0s - f1s, dx_ = p0x(i) - p1x(i);
      double vt = ds_ / std::sqrt(w), vx = dx_ / std::sqrt(2 * g);
      double a = v.d0 * f0ss / w + v.d1 * f1ss / w + v.dd * vt * vt;
      double c = v.d0 * c0(i) + v.d1 * c1(i) + v.dd * vx * vx;
      double bb = v.dd * vt * vx;
      double tr = a + c, det = a * c - bb * bb;
      double disc = std::sqrt(std::max(0.0, 0.25 * (a - c) * (a - c) + bb * bb));
      double l1 = 0.5 * tr + disc, l2 = 0.5 * tr - disc;
      (void)det;
      b.phase(i, j) = std::atan(l1) + std::atan(l2);
      b.min_margin = std::min(b.min_margin, b.phase(i, j) - h - eta1 / 2);
      double us = v.d0 * f0s + v.d1 * f1s, uss = v.d0 * f0ss + v.d1 * f1ss + v.dd * ds_ * ds_;
      double r = std::exp(sj);
      b.radial_d1 = std::max(b.radial_d1, std::abs(r * us));
      b.radial_d2 = std::max(b.radial_d2, std::abs(r * r * (uss + us)));
    }
  }
  b.boundary_error = std::max((b.underline_phi.col(0) - p0).cwiseAbs().maxCoeff(),
                              (b.underline_phi.col(ns - 1) - p1).cwiseAbs().maxCoeff());
  return b;
}

// ---- studies over epsilon ----

struct ScalingRow {
  double epsilon = 0.0;
  GeodesicEstimates est;
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  double hess_variation = 0.0;  // (max - min) / min of sup |d^X dbar^X phi|
  double grad_variation = 0.0;
  double time_ratio = 0.0;      // max / min of eps^2 sup |d_t d_tbar phi|
  double mixed_ratio = 0.0;
  bool spatial_uniform = false;  // variation < 15%
  bool temporal_bounded = false; // ratio < 4
};

inline ScalingReport estimate_scaling_study(const std::vector<GeodesicSolution>& runs) {
  ScalingReport r;
  double hmin = 1e300, hmax = 0, gmin = 1e300, gmax = 0, tmin = 1e300, tmax = 0, mmin = 1e300, mmax = 0;
  for (const auto& s : runs) {
    r.rows.push_back({s.epsilon, s.estimates});
    hmin = std::min(hmin, s.estimates.hess_x);
    hmax = std::max(hmax, s.estimates.hess_x);
    gmin = std::min(gmin, s.estimates.grad_x);
    gmax = std::max(gmax, s.estimates.grad_x);
    tmin = std::min(tmin, s.estimates.time_scaled);
    tmax = std::max(tmax, s.estimates.time_scaled);
    mmin = std::min(mmin, s.estimates.mixed_scaled);
    mmax = std::max(mmax, s.estimates.mixed_scaled);
  }
  auto var = [](double lo, double hi) { return hi == 0.0 ? 0.0 : (hi - lo) / std::max(lo, 1e-300); };
  auto ratio = [](double lo, double hi) { return hi == 0.0 ? 1.0 : hi / std::max(lo, 1e-300); };
  r.hess_variation = var(hmin, hmax);
  r.grad_variation = var(gmin, gmax);
  r.time_ratio = ratio(tmin, tmax);
  r.mixed_ratio = ratio(mmin, mmax);
  r.spatial_uniform = r.hess_variation < 0.15;
  r.temporal_bounded = r.time_ratio < 4.0;
  return r;
}

struct WeakGeodesic {
  Eigen::MatrixXd phi;  // finest-epsilon proxy
  double epsilon = 0.0;
  std::vector<double> cauchy;  // sup differences between successive epsilon solutions
  std::vector<FunctionalSample> functionals;
};

inline WeakGeodesic weak_geodesic_extrapolate(const std::vector<GeodesicSolution>& runs) {
  if (runs.size() < 3) throw Error(ErrorCode::TooFewSamples, "need at least three epsilon runs");
  std::vector<const GeodesicSolution*> order;
  for (const auto& r : runs) order.push_back(&r);
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->epsilon > b->epsilon; });
  WeakGeodesic w;
  for (size_t k = 1; k < order.size(); ++k) {
    if (order[k]->phi.rows() != order[0]->phi.rows() || order[k]->phi.cols() != order[0]->phi.cols())
      throw Error(ErrorCode::DimensionMismatch, "runs must share a grid");
    w.cauchy.push_back((order[k]->phi - order[k - 1]->phi).cwiseAbs().maxCoeff());
  }
  for (size_t k = 1; k < w.cauchy.size(); ++k)
    if (!(w.cauchy[k] < w.cauchy[k - 1]) && w.cauchy[k - 1] > 1e-13)
      throw Error(ErrorCode::NotCauchy, "successive epsilon differences do not decrease");
  w.phi = order.back()->phi;
  w.epsilon = order.back()->epsilon;
  w.functionals = order.back()->functionals;
  return w;
}

// ---- full annulus check of the S^1 reduction ----

struct S1SpotCheck {
  double sup_difference = 0.0;
  double residual = 0.0;
  int iterations = 0;
  int angular_nodes = 0;
};

// Dense Newton in (x, s, theta) with Fourier in the angle, started off the symmetric solution.
inline S1SpotCheck s1_spot_check(const AnnulusGrid& grid, double theta_hat, int angular = 8) {
  auto reduced = solve_epsilon_geodesic(grid, theta_hat);
  AnnulusOperator op(grid, theta_hat);
  const int nx = op.nx(), ns = op.ns(), na = angular, g1 = nx * ns;
  const int total = g1 * na;
  const double g = op.g();
  Eigen::MatrixXd da = detail::fourier_matrix(na, 1) / (2 * kPi), daa = detail::fourier_matrix(na, 2) / (4 * kPi * kPi);
  auto I = [](int n) { return Eigen::MatrixXd::Identity(n, n); };
  auto kron = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd k(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = 0; j < a.cols(); ++j) k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return k;
  };
  // node index i + nx (j + ns m)
  Eigen::MatrixXd Dx = kron(I(na), kron(I(ns), op.dx())), Dxx = kron(I(na), kron(I(ns), op.dxx()));
  Eigen::MatrixXd Ds = kron(I(na), kron(op.radial().d1(), I(nx))), Dss = kron(I(na), kron(op.radial().d2(), I(nx)));
  Eigen::MatrixXd Da = kron(da, I(g1)), Daa = kron(daa, I(g1));
  Eigen::MatrixXd Dsx = Ds * Dx, Dax = Da * Dx;
  std::vector<int> inner;
  for (int m = 0; m < na; ++m)
    for (int j = 1; j < ns - 1; ++j)
      for (int i = 0; i < nx; ++i) inner.push_back(i + nx * (j + ns * m));
  const double sh = std::sin(theta_hat), ch = std::cos(theta_hat);
  Eigen::VectorXd abg(total), w(total);
  for (int m = 0; m < na; ++m)
    for (int j = 0; j < ns; ++j)
      for (int i = 0; i < nx; ++i) {
        abg(i + nx * (j + ns * m)) = op.background_alpha()(i);
        w(i + nx * (j + ns * m)) = op.weight()(j);
      }
  Eigen::VectorXd phi(total), ref(total);
  for (int m = 0; m < na; ++m)
    for (int j = 0; j < ns; ++j)
      for (int i = 0; i < nx; ++i) {
        double s = op.radial().nodes()(j), x = static_cast<double>(i) / nx, th = static_cast<double>(m) / na;
        ref(i + nx * (j + ns * m)) = reduced.phi(i, j);
        phi(i + nx * (j + ns * m)) =
            reduced.phi(i, j) + 1e-3 * s * (1 - s) * std::sin(2 * kPi * th) * (1 + std::cos(2 * kPi * x));
      }
  S1SpotCheck out;
  out.angular_nodes = na;
  auto residual = [&](const Eigen::VectorXd& p, Eigen::VectorXd& fres) {
    Eigen::VectorXd px = Dx * p, pxx = Dxx * p, pss = Dss * p, paa = Daa * p, psx = Dsx * p, pax = Dax * p;
    fres.resize(total);
    double r = 0.0;
    for (int q : inner) {
      double c = (abg(q) + 0.5 * pxx(q)) / g, lap = pss(q) + paa(q);
      double a = lap / w(q), b2 = (psx(q) * psx(q) + pax(q) * pax(q)) / (2 * g * w(q));
      fres(q) = (ch + c * sh) * lap + w(q) * (c * ch - sh) - sh * (psx(q) * psx(q) + pax(q) * pax(q)) / (2 * g);
      r = std::max(r, std::abs(std::atan2(a + c, 1 - a * c + b2) - theta_hat));
    }
    return r;
  };
  Eigen::VectorXd e;
  double res = residual(phi, e);
  for (int it = 0; it < 30 && res > 1e-12; ++it) {
    Eigen::VectorXd px = Dx * phi, pxx = Dxx * phi, pss = Dss * phi, paa = Daa * phi, psx = Dsx * phi,
                    pax = Dax * phi;
    const int ni = static_cast<int>(inner.size());
    Eigen::MatrixXd jac(ni, ni);
    Eigen::VectorXd rhs(ni);
    for (int r = 0; r < ni; ++r) {
      int q = inner[r];
      double c = (abg(q) + 0.5 * pxx(q)) / g, lap = pss(q) + paa(q);
      double kl = ch + c * sh, kxx = (sh * lap + w(q) * ch) / (2 * g), ksx = -sh * psx(q) / g,
             kax = -sh * pax(q) / g;
      for (int cidx = 0; cidx < ni; ++cidx) {
        int qq = inner[cidx];
        jac(r, cidx) = kl * (Dss(q, qq) + Daa(q, qq)) + kxx * Dxx(q, qq) + ksx * Dsx(q, qq) + kax * Dax(q, qq);
      }
      rhs(r) = -e(q);
    }
    Eigen::VectorXd dlt = jac.partialPivLu().solve(rhs);
    for (int r = 0; r < ni; ++r) phi(inner[r]) += dlt(r);
    res = residual(phi, e);
    out.iterations = it + 1;
  }
  out.residual = res;
  out.sup_difference = (phi - ref).cwiseAbs().maxCoeff();
  return out;
}

}  // namespace dhym
