// Acceptance run: one PASS/FAIL line per criterion.
//
// Two criteria cannot be met as stated (see README, "Known deviations"). Each has a
// documented failure mode; the process exits 0 only if every failure is exactly
// that mode, so an unexpected regression anywhere still turns the run red.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "dhym/dhym_solver.hpp"
#include "dhym/geodesic.hpp"
#include "dhym/mirror_bridge.hpp"
#include "dhym/model_curve.hpp"
#include "dhym/output.hpp"
#include "dhym/phase_core.hpp"
#include "dhym/regmax.hpp"
#include "dhym/stability.hpp"
#include "dhym/syz_mirror.hpp"

using namespace dhym;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  bool known_failure = false;  // the failure is the documented one
};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

CMat scalar(double v) { return CMat::Constant(1, 1, v); }

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : "; ") + p;
  return out;
}

// ---- 1, 2: Bl_p P^3 ----

struct Blp3 {
  IntersectionRing ring = IntersectionRing::blp3();
  DivisorClass omega = ring.divisor({{"H", 2}, {"E", -1}});
  DivisorClass line(const Rational& a, const Rational& b) const { return ring.divisor({{"H", a}, {"E", Rational(-b)}}); }
};

Outcome criterion1() {
  auto t0 = Clock::now();
  Blp3 b;
  std::vector<std::string> bad, notes;
  auto c = stability_classify(b.ring, b.line(5, 3), b.omega);
  if (c.status != VerdictStatus::Candidate) bad.push_back("(5,3) gave " + c.label());
  auto h = stability_classify(b.ring, b.line(5, -2), b.omega);
  const CRational ze = h.charge.at("E");
  // proportional to -3 - 4i: 4 Re = 3 Im with both negative
  const bool prop = ze.re < 0 && ze.im < 0 && 4 * ze.re == 3 * ze.im;
  if (h.label() != "HEmptyByCharge(E)" || !prop) bad.push_back("(5,-2) gave " + h.label() + ", Z_E(1) = " + to_string(ze.re) + " + " + to_string(ze.im) + "i");
  auto p = stability_classify(b.ring, b.line(5, 1), b.omega);
  if (p.label() != "PhaseObstructed(E)") bad.push_back("(5,1) gave " + p.label());
  // the margins are exact rationals; their signs must agree with the verdicts
  for (const auto& m : c.margins)
    if (!m.pass()) bad.push_back("(5,3) margin " + m.check + " fails");

  int undefined = 0, certified = 0, scanned = 0;
  for (int k = 301; k <= 599; ++k, ++scanned) {
    auto v = stability_classify(b.ring, b.line(Rational(k, 1000), -3), b.omega);
    if (v.status != VerdictStatus::AngleUndefined) continue;
    ++undefined;
    for (const auto& [name, a] : v.angles)
      if (a.crossing && a.crossing->roots_on_ray > 0) {
        ++certified;
        break;
      }
  }
  const double secs = seconds_since(t0);
  notes.push_back("(5,3) Candidate, (5,-2) " + h.label() + " with Z_E(1) = " + to_string(ze.re) + " + " + to_string(ze.im) + "i, (5,1) " + p.label());
  notes.push_back("b = -3 scan: " + std::to_string(undefined) + "/" + std::to_string(scanned) + " AngleUndefined, " +
                  std::to_string(certified) + " certified crossings");
  notes.push_back(fmt(secs) + " s");
  const bool regimes = bad.empty();
  const bool scan = undefined > 0 && certified == undefined;
  Outcome o;
  o.pass = regimes && scan && secs < 1.0;
  o.detail = join(regimes ? notes : bad);
  // documented: for b = -3 no charge path meets the origin on [1, inf)
  o.known_failure = regimes && undefined == 0 && secs < 1.0;
  return o;
}

Outcome criterion2() {
  Blp3 b;
  auto v = stability_classify(b.ring, b.line(5, 3), b.omega);
  const std::string lhs = to_string(v.chern.lhs), rhs = to_string(v.chern.rhs);
  const Rational want_l = Rational(7 * 98, 6), want_r = 3 * Rational(41, 2) * 17;
  Outcome o;
  o.pass = v.chern.applicable && v.chern.lhs == want_l && v.chern.rhs == want_r && lhs == to_string(want_l) &&
           rhs == to_string(want_r) && v.chern.holds && v.chern.lhs < v.chern.rhs;
  o.detail = "LHS " + lhs + ", RHS " + rhs + (v.chern.lhs < v.chern.rhs ? ", LHS < RHS" : ", LHS >= RHS");
  return o;
}

// ---- 3: dHYM n = 1 ----

Outcome criterion3() {
  const double th = 0.6;
  auto g = FiberGeometry::flat(1, 256, scalar(1.0), scalar(std::tan(th)));
  SpectralTorus t(g.grid);
  g.background.resize(static_cast<Eigen::Index>(t.size()));
  for (size_t p = 0; p < t.size(); ++p) {
    const double x = t.coord(p, 0), y = t.coord(p, 1);
    g.background(static_cast<Eigen::Index>(p)) = 0.05 * std::cos(2 * kPi * x) + 0.02 * std::sin(2 * kPi * (x + 2 * y));
  }
  auto t0 = Clock::now();
  FiberCalculus fc(g);
  auto s = solve_dhym_linear_1d(fc, th);
  const double secs = seconds_since(t0);
  const double res = phase_residual(fc, s.phi, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(fc.nodes()), th));
  const double v = volume_functional(fc, s.phi), bound = std::abs(fc.class_integral());
  const double rel = std::abs(v - bound) / bound;
  Outcome o;
  o.pass = res < 1e-10 && rel < 1e-8 && secs < 1.0;
  o.detail = "256x256: sup|Theta - theta_hat| = " + fmt(res) + ", |V - |int Omega||/V = " + fmt(rel) + ", " + fmt(secs) + " s";
  return o;
}

// ---- 4, 5: pointwise operator ----

CMat random_hermitian(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cplx(g(rng), g(rng));
  return 0.5 * (a + a.adjoint());
}

Outcome criterion4(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.5);
  double worst_lin = 0, worst_hess = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 5;
    RVec mu(n);
    for (auto& v : mu) v = g(rng);
    CMat a = random_hermitian(rng, n);
    // first variation along A: sum_i w_i A_ii in the eigenbasis
    const RVec w = linearization_weights(mu);
    double lin = 0;
    for (int i = 0; i < n; ++i) lin += w(i) * a(i, i).real();
    const double h1 = 1e-5;
    const double fd1 = (phase_of_shifted(mu, a, h1) - phase_of_shifted(mu, a, -h1)) / (2 * h1);
    worst_lin = std::max(worst_lin, std::abs(fd1 - lin) / std::max(std::abs(lin), 1e-2));
    const double h2 = 1e-4;
    const double fd2 = (phase_of_shifted(mu, a, h2) - 2 * phase_of_shifted(mu, a, 0) + phase_of_shifted(mu, a, -h2)) / (h2 * h2);
    const double q = hessian_quadratic_form(mu, a);
    worst_hess = std::max(worst_hess, std::abs(fd2 - q) / std::max(std::abs(q), 1e-2));
  }
  Outcome o;
  o.pass = worst_lin < 1e-6 && worst_hess < 1e-5;
  o.detail = "200 samples, worst relative error: linearization " + fmt(worst_lin) + ", Hessian " + fmt(worst_hess);
  return o;
}

Outcome criterion5(std::uint64_t seed) {
  int violations = 0, samples = 0;
  double worst4 = 1e300;
  for (int n : {2, 3, 4})
    for (double eta : {0.05, 0.2}) {
      for (const RVec& mu : detail::sample_branch(n + 1, eta, 10000, seed + 31 * static_cast<std::uint64_t>(n) + (eta > 0.1 ? 7 : 0))) {
        ++samples;
        auto rep = branch_property_report(mu, {0.0, eta, 0.1}, 1);
        for (const auto& c : rep.checks) {
          if (c.id == 8) continue;
          if (c.id == 4) worst4 = std::min(worst4, c.margin);
          else if (!c.holds) ++violations;
        }
      }
    }
  Outcome o;
  o.pass = violations == 0 && worst4 >= -1e-12;
  o.detail = std::to_string(samples) + " samples, " + std::to_string(violations) + " violations of (1),(2),(3),(5),(6), min margin of (4) " + fmt(worst4);
  return o;
}

// ---- 6: regularized maximum ----

Outcome criterion6(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ut(-3.0, 3.0), ud(1e-3, 2.0), uc(-5.0, 5.0);
  const auto& r = RegularizedMax::instance();
  int bounds = 0, exact = 0, translation = 0, convex = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const double t0 = ut(rng), t1 = ut(rng), d = ud(rng), c = uc(rng), s0 = ut(rng), s1 = ut(rng);
    auto v = r.eval(t0, t1, d);
    if (v.m < std::max(t0, t1) - 1e-8 || v.m > std::max(t0, t1) + d + 1e-8) ++bounds;
    if ((t1 + d <= t0 - d && std::abs(v.m - t0) > 1e-8) || (t0 + d <= t1 - d && std::abs(v.m - t1) > 1e-8)) ++exact;
    if (std::abs(r(t0 + c, t1 + c, d) - v.m - c) > 1e-8) ++translation;
    const double mid = r(0.5 * (t0 + s0), 0.5 * (t1 + s1), d);
    if (v.d0 < -1e-8 || v.d1 < -1e-8 || std::abs(v.d0 + v.d1 - 1) > 1e-8 || v.dd < -1e-8 || mid > 0.5 * (v.m + r(s0, s1, d)) + 1e-8) ++convex;
  }
  Outcome o;
  o.pass = bounds + exact + translation + convex == 0;
  o.detail = "10000 samples; violations: bounds " + std::to_string(bounds) + ", exact off the band " + std::to_string(exact) +
             ", translation " + std::to_string(translation) + ", convex and nondecreasing " + std::to_string(convex);
  return o;
}

// ---- 7, 8: epsilon geodesics ----

constexpr double kTheta = 0.6;

AnnulusGrid geodesic_grid(int nx, int ns, double eps) {
  AnnulusGrid g;
  g.geometry = FiberGeometry::flat(1, nx, scalar(1.0), scalar(std::tan(kTheta)));
  g.geometry.grid = {nx, 8};
  SpectralTorus t(g.geometry.grid);
  g.phi0.resize(static_cast<Eigen::Index>(t.size()));
  g.phi1.resize(static_cast<Eigen::Index>(t.size()));
  for (size_t p = 0; p < t.size(); ++p) {
    const double x = t.coord(p, 0);
    g.phi0(static_cast<Eigen::Index>(p)) = 0.02 * std::cos(2 * kPi * x);
    g.phi1(static_cast<Eigen::Index>(p)) = 0.015 * std::sin(2 * kPi * x) + 0.1;
  }
  g.s_nodes = ns;
  g.epsilon = eps;
  return g;
}

// J convex, C affine against its endpoint interpolant, Re Z and Im Z concave
std::vector<std::string> shape_failures(const std::vector<FunctionalSample>& f, const std::string& tag) {
  std::vector<std::string> bad;
  auto rep = second_difference_probe(f, 1e-6);
  if (rep.j.min_d2 < -1e-6 * rep.j.scale) bad.push_back(tag + " J min d2 " + fmt(rep.j.min_d2));
  double cdev = 0, cscale = 0;
  const double c0 = f.front().c, c1 = f.back().c;
  for (const auto& x : f) {
    cdev = std::max(cdev, std::abs(x.c - ((1 - x.s) * c0 + x.s * c1)));
    cscale = std::max(cscale, std::abs(x.c));
  }
  if (cdev >= 1e-6 * cscale) bad.push_back(tag + " C off its chord by " + fmt(cdev / cscale));
  if (rep.re_z.max_d2 > 1e-6 * rep.re_z.scale) bad.push_back(tag + " Re Z max d2 " + fmt(rep.re_z.max_d2));
  if (rep.im_z.max_d2 > 1e-6 * rep.im_z.scale) bad.push_back(tag + " Im Z max d2 " + fmt(rep.im_z.max_d2));
  return bad;
}

std::vector<GeodesicSolution> g_runs;
double g_seconds = 0;
std::string g_error;

Outcome criterion7() {
  auto t0 = Clock::now();
  std::vector<std::string> bad;
  GeodesicOptions opt;
  try {
    for (double eps : {0.2, 0.1, 0.05, 0.025}) g_runs.push_back(solve_epsilon_geodesic(geodesic_grid(128, 65, eps), kTheta, opt));
  } catch (const Error& e) {
    g_error = e.what();
  }
  g_seconds = seconds_since(t0);
  Outcome o;
  if (!g_error.empty()) {
    o.detail = g_error;
    return o;
  }
  double worst_res = 0;
  int worst_it = 0;
  for (const auto& s : g_runs) {
    worst_res = std::max(worst_res, s.run.residuals.back());
    worst_it = std::max(worst_it, s.run.iterations);
    if (!s.run.converged || s.run.residuals.back() >= 1e-8 || s.run.iterations > 30) bad.push_back("eps " + fmt(s.epsilon) + " did not converge");
    auto f = shape_failures(s.functionals, "eps " + fmt(s.epsilon));
    bad.insert(bad.end(), f.begin(), f.end());
  }
  auto sc = estimate_scaling_study(g_runs);
  if (!(sc.hess_variation < 0.15)) bad.push_back("spatial C2 varies " + fmt(sc.hess_variation));
  if (!(sc.time_ratio <= 4.0)) bad.push_back("eps^2 sup|phi_ttbar| ratio " + fmt(sc.time_ratio));
  if (g_seconds >= 300) bad.push_back("runtime " + fmt(g_seconds) + " s");
  o.pass = bad.empty();
  o.detail = bad.empty() ? "128x65, eps 0.2..0.025: residual <= " + fmt(worst_res) + ", <= " + std::to_string(worst_it) +
                               " iterations, C2 variation " + fmt(sc.hess_variation) + ", eps^2 time ratio " +
                               fmt(sc.time_ratio) + ", " + fmt(g_seconds) + " s"
                         : join(bad);
  return o;
}

Outcome criterion8() {
  Outcome o;
  if (g_runs.size() != 4) {
    o.detail = "criterion 7 runs missing: " + g_error;
    return o;
  }
  try {
    auto w = weak_geodesic_extrapolate(g_runs);
    bool decreasing = true;
    std::string seq;
    for (size_t k = 0; k < w.cauchy.size(); ++k) {
      seq += (k ? ", " : "") + fmt(w.cauchy[k]);
      if (k && !(w.cauchy[k] < w.cauchy[k - 1])) decreasing = false;
    }
    auto bad = shape_failures(w.functionals, "finest");
    o.pass = decreasing && bad.empty();
    o.detail = "sup differences " + seq + (bad.empty() ? "; finest path keeps the convexity checks" : "; " + join(bad));
  } catch (const Error& e) {
    o.detail = e.what();
  }
  return o;
}

// ---- 9: path independence ----

PotentialField random_field(const SpectralTorus& t, std::mt19937_64& rng, double amp) {
  std::normal_distribution<double> g(0.0, amp);
  PotentialField f = PotentialField::Zero(static_cast<Eigen::Index>(t.size()));
  for (int kx = -2; kx <= 2; ++kx)
    for (int ky = -2; ky <= 2; ++ky) {
      const double a = g(rng), b = g(rng);
      for (size_t p = 0; p < t.size(); ++p) {
        const double arg = 2 * kPi * (kx * t.coord(p, 0) + ky * t.coord(p, 1));
        f(static_cast<Eigen::Index>(p)) += a * std::cos(arg) + b * std::sin(arg);
      }
    }
  return f;
}

Outcome criterion9(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  FiberCalculus fc(FiberGeometry::flat(1, 32, scalar(1.0), scalar(0.5)));
  const auto& t = fc.torus();
  PotentialField a = random_field(t, rng, 0.01), b = random_field(t, rng, 0.01);
  PotentialField w1 = random_field(t, rng, 0.01), w2 = random_field(t, rng, 0.01);
  std::vector<PotentialField> p1, p2;
  std::vector<double> s;
  for (int k = 0; k <= 64; ++k) {
    const double u = k / 64.0;
    s.push_back(u);
    p1.push_back((1 - u) * a + u * b + std::sin(kPi * u) * w1);
    p2.push_back((1 - u) * a + u * b + u * (1 - u) * w2 + std::sin(2 * kPi * u) * w2);
  }
  const cplx c1 = path_cy(fc, p1, s), c2 = path_cy(fc, p2, s);
  const double rel = std::abs(c1 - c2) / std::abs(c1);
  Outcome o;
  o.pass = rel < 1e-6;
  o.detail = "65-sample paths: |CY_1 - CY_2|/|CY_1| = " + fmt(rel);
  return o;
}

// ---- 10: model curve ----

Outcome criterion10() {
  auto t0 = Clock::now();
  const double delta = 0.05;
  ModelCurve mc(1, scalar(1.0), scalar(std::tan(kTheta)), {}, delta);
  const cplx num = mc.cy_slope(8.0);
  auto ring = IntersectionRing::projective(1);
  auto h = ring.divisor({{"H", 1}});
  auto alg = model_curve_slope_subvariety(ring, ring.cycle("point"), h, h, Rational(1, 20), true);
  const cplx q = num / alg.slope;
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = std::abs(q - 1.0) < 0.02 && secs < 60;
  o.detail = "s = 8: numeric " + fmt(num.real()) + " + " + fmt(num.imag()) + "i, algebraic " + fmt(alg.slope.real()) + " + " +
             fmt(alg.slope.imag()) + "i, ratio " + fmt(q.real()) + " + " + fmt(q.imag()) + "i, " + fmt(secs) + " s";
  // documented: the numeric slope is half the algebraic leading term
  o.known_failure = std::abs(q - 0.5) < 0.01 && secs < 60;
  return o;
}

// ---- 11: mirror ----

ConvexFn p2_potential() {
  ConvexFn p;
  p.m = 2;
  p.f = [](const RVecX& x) { return std::log(1 + std::exp(2 * x(0)) + std::exp(2 * x(1))); };
  p.grad = [](const RVecX& x) {
    const double a = std::exp(2 * x(0)), b = std::exp(2 * x(1)), s = 1 + a + b;
    RVecX g(2);
    g << 2 * a / s, 2 * b / s;
    return g;
  };
  p.hess = [](const RVecX& x) {
    const double a = std::exp(2 * x(0)), b = std::exp(2 * x(1)), s = 1 + a + b;
    RMatX h(2, 2);
    h << 4 * a * (1 + b) / (s * s), -4 * a * b / (s * s), -4 * a * b / (s * s), 4 * b * (1 + a) / (s * s);
    return h;
  };
  return p;
}

Outcome criterion11() {
  std::vector<std::string> bad, notes;
  // involution
  double inv = 0;
  auto p1 = p1_potential();
  auto back = legendre(legendre(p1));
  for (int k = 0; k <= 40; ++k) {
    const double x = -2 + 0.1 * k;
    inv = std::max(inv, std::abs(back.f(RVecX::Constant(1, x)) - p1.f(RVecX::Constant(1, x))));
  }
  auto p2 = p2_potential();
  auto back2 = legendre(legendre(p2));
  for (double x1 : {-1.0, -0.3, 0.4})
    for (double x2 : {-0.7, 0.0, 0.5}) {
      RVecX x(2);
      x << x1, x2;
      inv = std::max(inv, std::abs(back2.f(x) - p2.f(x)));
    }
  notes.push_back("involution " + fmt(inv));
  if (!(inv < 1e-7)) bad.push_back("involution error " + fmt(inv));
  // P^1 closed form
  auto u = legendre(p1);
  double cf = 0;
  for (int k = 0; k <= 190; ++k) {
    const double y = 0.05 + 0.01 * k;
    cf = std::max(cf, std::abs(u.f(RVecX::Constant(1, y)) - p1_symplectic_closed_form(y)));
  }
  notes.push_back("P1 closed form " + fmt(cf));
  if (!(cf < 1e-8)) bad.push_back("P1 closed form error " + fmt(cf));
  // dHYM solution on the fiber is special Lagrangian on the mirror
  auto g = FiberGeometry::flat(1, 64, scalar(1.0), scalar(std::tan(kTheta)));
  g.grid = {64, 8};
  SpectralTorus t(g.grid);
  g.background.resize(static_cast<Eigen::Index>(t.size()));
  for (size_t p = 0; p < t.size(); ++p)
    g.background(static_cast<Eigen::Index>(p)) = 0.03 * std::cos(2 * kPi * t.coord(p, 0)) + 0.01 * std::sin(4 * kPi * t.coord(p, 0));
  FiberCalculus fc(g);
  auto sol = solve_dhym_newton(fc, kTheta, PotentialField::Zero(static_cast<Eigen::Index>(fc.nodes())));
  auto fm = fiber_mirror_section(fc, sol.phi, kTheta, 1024);
  const double slag = slag_residual(fm.section, fm.theta_tilde).sup;
  notes.push_back("slag residual at 1024 nodes " + fmt(slag));
  if (!sol.run.converged || !(slag < 1e-6)) bad.push_back("slag residual " + fmt(slag));
  // refinement order of the residual operator on a curved section
  auto exact = [](double y) {
    const double h = 1e-5;
    return std::atan((p1_model_family(3, 1.0, 1.0, y + h) - p1_model_family(3, 1.0, 1.0, y - h)) / (2 * h));
  };
  std::vector<double> errs;
  for (int nodes : {257, 513, 1025}) {
    auto grid = SectionGrid::interval(0.1, 1.9, nodes);
    auto s = lyz_section(u, pull_gradient(u, p1_family_x_gradient(3, 1.0, 1.0)), grid);
    auto r = slag_residual(s, 0.0);
    double e = 0;
    for (size_t p = 0; p < grid.size(); ++p) e = std::max(e, std::abs(r.phase(static_cast<Eigen::Index>(p)) - exact(grid.point(p)(0))));
    errs.push_back(e);
  }
  const double o1 = std::log2(errs[0] / errs[1]), o2 = std::log2(errs[1] / errs[2]);
  notes.push_back("observed orders " + fmt(o1) + ", " + fmt(o2));
  if (std::abs(o1 - 2) > 0.2 || std::abs(o2 - 2) > 0.2) bad.push_back("observed orders " + fmt(o1) + ", " + fmt(o2));
  // P^1 family at s = 20 against its limit, and the end gaps
  auto grid = SectionGrid::interval(0.1, 1.9, 181);
  auto s20 = lyz_section(u, pull_gradient(u, p1_family_x_gradient(3, 1.0, 20.0)), grid);
  double lim = 0;
  for (size_t p = 0; p < grid.size(); ++p) {
    const double y = grid.point(p)(0);
    lim = std::max(lim, std::abs(s20.theta[p](0) - (-3 * y - 1.0 * (4 - 3 * y))));
  }
  const double left = std::abs(p1_model_limit(3, 1.0, 0.0) - 0.0), right = std::abs(p1_model_limit(3, 1.0, 2.0) + 6.0);
  notes.push_back("s = 20 vs limit " + fmt(lim) + ", gaps " + fmt(left) + " and " + fmt(right));
  if (!(lim < 1e-9)) bad.push_back("s = 20 vs limit " + fmt(lim));
  if (std::abs(left - 4) > 1e-12 || std::abs(right - 2) > 1e-12) bad.push_back("gaps " + fmt(left) + ", " + fmt(right));
  Outcome o;
  o.pass = bad.empty();
  o.detail = join(bad.empty() ? notes : bad);
  return o;
}

}  // namespace

int main() {
  const std::uint64_t seed = lab_seed();
  std::vector<std::pair<int, std::function<Outcome()>>> all{
      {1, criterion1},
      {2, criterion2},
      {3, criterion3},
      {4, [&] { return criterion4(seed); }},
      {5, [&] { return criterion5(seed); }},
      {6, [&] { return criterion6(seed); }},
      {7, criterion7},
      {8, criterion8},
      {9, [&] { return criterion9(seed); }},
      {10, criterion10},
      {11, criterion11},
  };
  int unexpected = 0, failed = 0;
  std::cout << "seed " << seed << "\n";
  for (auto& [id, run] : all) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.detail = std::string("threw ") + e.what();
    }
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail;
    if (!o.pass) {
      ++failed;
      if (o.known_failure) std::cout << "  [documented failure mode]";
      else ++unexpected;
    }
    std::cout << std::endl;
  }
  std::cout << failed << " failed, " << unexpected << " outside their documented failure mode\n";
  return unexpected == 0 ? 0 : 1;
}
