#pragma once

// dhym-lab dhym | geodesic | model-curve. All three read a [fiber] section:
//
//   [fiber]  n = 1
//            grid = 128, 8          # one size, or one per real axis (x1, y1, x2, y2)
//            omega = 1              # diagonal entries
//            theta = 0.6            # alpha = tan(theta) omega (n = 1), or alpha = ... diagonal entries
//            background = 0.03*cos(2*pi*x1)

#include <map>
#include <numbers>

#include "dhym/dhym_solver.hpp"
#include "dhym/geodesic.hpp"
#include "dhym/lab/common.hpp"
#include "dhym/model_curve.hpp"
#include "dhym/stability.hpp"

namespace dhym::lab {

inline bool solver_error(ErrorCode c) {
  return c == ErrorCode::NotConverged || c == ErrorCode::BranchExit || c == ErrorCode::SubsolutionViolated ||
         c == ErrorCode::SliceExitsH || c == ErrorCode::NotCauchy || c == ErrorCode::StructuralFailure;
}

inline OutputTable residual_table(const SolverRun& run) {
  OutputTable t({"iteration", "residual"});
  for (size_t k = 0; k < run.residuals.size(); ++k) t.add({std::to_string(k), fmt(run.residuals[k])});
  return t;
}

inline OutputTable functional_table(const std::vector<FunctionalSample>& fs) {
  OutputTable t({"s", "re_cy", "im_cy", "j", "c", "re_z", "im_z", "v"});
  for (const auto& f : fs) t.add_numbers({f.s, f.cy.real(), f.cy.imag(), f.j, f.c, f.z.real(), f.z.imag(), f.v});
  return t;
}

inline OutputTable convexity_table(const ConvexityReport& r) {
  OutputTable t({"functional", "min_d2", "max_d2", "scale", "shape"});
  auto row = [&](const char* name, const SeriesShape& s) {
    t.add({name, fmt(s.min_d2), fmt(s.max_d2), fmt(s.scale), to_string(s.shape)});
  };
  row("j", r.j);
  row("c", r.c);
  row("re_z", r.re_z);
  row("im_z", r.im_z);
  return t;
}

// ---- dhym ----
//   [dhym]  method = linear | newton   (linear is the n = 1 Poisson solve)
//           tol = 1e-12

struct DhymOutcome {
  DhymSolution sol;
  double theta_hat = 0.0;
  double residual = 0.0;
  double volume = 0.0;
  double bound = 0.0;
};

inline DhymOutcome solve_dhym_config(const Config& c, const FiberGeometry& g) {
  FiberCalculus fc(g);
  const std::string method = c.str("dhym", "method", g.n == 1 ? "linear" : "newton");
  if (method != "linear" && method != "newton") c.fail_at("dhym", "method", "method is linear or newton");
  const PotentialField zero = PotentialField::Zero(static_cast<Eigen::Index>(fc.nodes()));
  DhymOutcome out;
  if (c.has("dhym", "theta_hat")) {
    out.theta_hat = cnum(c, "dhym", "theta_hat");
  } else {
    auto h = hat_theta(fc, &zero);
    out.theta_hat = *h.lift;
  }
  const double tol = cnum(c, "dhym", "tol", 1e-12);
  if (method == "linear") {
    out.sol = solve_dhym_linear_1d(fc, out.theta_hat);
  } else {
    NewtonOptions opt;
    opt.tol = tol;
    opt.max_iter = c.integer("dhym", "max_iter", opt.max_iter);
    out.sol = solve_dhym_newton(fc, out.theta_hat, zero, opt);
  }
  out.residual = phase_residual(fc, out.sol.phi, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(fc.nodes()), out.theta_hat));
  out.sol.run.converged = out.residual < std::max(tol, 1e-10);
  out.volume = volume_functional(fc, out.sol.phi);
  out.bound = std::abs(fc.class_integral());
  return out;
}

inline RunResult run_dhym(const RunOptions& o) {
  const Config c = Config::load(o.config.string());
  const FiberGeometry g = parse_fiber(c);
  DhymOutcome r;
  try {
    r = solve_dhym_config(c, g);
  } catch (const Error& e) {
    if (solver_error(e.code())) return {kSolverFailure, e.what()};
    throw;
  }
  FiberCalculus fc(g);
  prepare_out(o);
  field_table(g, r.sol.phi).write(o.out / "phi.csv");
  residual_table(r.sol.run).write(o.out / "residuals.csv");
  functional_table({functionals_at(fc, r.sol.phi, r.theta_hat)}).write(o.out / "functionals.csv");
  OutputTable sum({"theta_hat", "residual", "volume", "class_modulus", "relative_gap", "iterations", "converged"});
  sum.add({fmt(r.theta_hat), fmt(r.residual), fmt(r.volume), fmt(r.bound), fmt((r.volume - r.bound) / r.bound),
           std::to_string(r.sol.run.iterations), r.sol.run.converged ? "true" : "false"});
  sum.write(o.out / "summary.csv");
  std::vector<std::string> artifacts{"config", "phi.csv", "residuals.csv", "functionals.csv", "summary.csv"};
  if (o.svg) {
    // phase along the first axis at y = 0
    auto sp = fc.spectra(fc.curvature_of(r.sol.phi));
    const auto& t = fc.torus();
    std::vector<std::pair<double, double>> phase, pot;
    double lo = r.theta_hat - 0.1, hi = r.theta_hat + 0.1, plo = 0, phi_hi = 0;
    for (size_t p = 0; p < t.size(); ++p) {
      bool row = true;
      for (int a = 1; a < t.rank(); ++a) row = row && t.index_along(p, a) == 0;
      if (!row) continue;
      phase.emplace_back(t.coord(p, 0), sp[p].theta);
      pot.emplace_back(t.coord(p, 0), r.sol.phi(static_cast<Eigen::Index>(p)));
      lo = std::min(lo, sp[p].theta);
      hi = std::max(hi, sp[p].theta);
      plo = std::min(plo, r.sol.phi(static_cast<Eigen::Index>(p)));
      phi_hi = std::max(phi_hi, r.sol.phi(static_cast<Eigen::Index>(p)));
    }
    double span = std::max(phi_hi - plo, 1e-12);
    for (auto& [x, v] : pot) v = lo + (hi - lo) * (v - plo) / span;
    Svg svg(0, 1, lo, hi);
    svg.axes();
    svg.polyline(phase, "#1f77b4");
    svg.polyline(pot, "#999999", true);
    svg.text(0.02, hi, "phase (solid), rescaled potential (dashed)", 11);
    svg.write(o.out / "slices.svg");
    artifacts.push_back("slices.svg");
  }
  RunManifest man("dhym");
  record_config(o, man, c);
  record_fiber(man, g);
  record_conventions(man);
  man.set("dhym", "method", c.str("dhym", "method", g.n == 1 ? "linear" : "newton"));
  man.set("dhym", "theta_hat", r.theta_hat);
  man.set("dhym", "tol", cnum(c, "dhym", "tol", 1e-12));
  man.set("timing", "solve_seconds", r.sol.run.wall_seconds);
  man.write(o.out, artifacts);
  if (!r.sol.run.converged) return {kSolverFailure, "residual " + fmt(r.residual) + " above tolerance"};
  return {kOk, "residual " + fmt(r.residual) + ", V = " + fmt(r.volume)};
}

// ---- geodesic ----
//   [geodesic]  phi0 = 0.02*cos(2*pi*x1)
//               phi1 = 0.015*sin(2*pi*x1) + 0.1
//               epsilons = 0.2, 0.1, 0.05, 0.025
//               s_nodes = 65
//               radial = fd | chebyshev
//               samples = 17, tol = 1e-8, max_iter = 30

struct GeodesicSetup {
  AnnulusGrid grid;
  std::vector<double> epsilons;
  double theta_hat = 0.0;
  GeodesicOptions opt;
};

inline GeodesicSetup parse_geodesic(const Config& c) {
  GeodesicSetup s;
  s.grid.geometry = parse_fiber(c);
  if (s.grid.geometry.n != 1) c.fail_at("fiber", "n", "geodesics are solved on n = 1 fibers");
  s.grid.phi0 = sample_field(s.grid.geometry, expr_at(c, "geodesic", "phi0"));
  s.grid.phi1 = sample_field(s.grid.geometry, expr_at(c, "geodesic", "phi1"));
  s.grid.s_nodes = c.integer("geodesic", "s_nodes", 65);
  const std::string radial = c.str("geodesic", "radial", "fd");
  if (radial == "fd") s.grid.radial = RadialScheme::FiniteDifference;
  else if (radial == "chebyshev") s.grid.radial = RadialScheme::Chebyshev;
  else c.fail_at("geodesic", "radial", "radial is fd or chebyshev");
  s.epsilons = cnums(c, "geodesic", "epsilons");
  for (double e : s.epsilons)
    if (!(e > 0)) c.fail_at("geodesic", "epsilons", "epsilons must be positive");
  FiberCalculus fc(s.grid.geometry);
  s.theta_hat = c.has("geodesic", "theta_hat") ? cnum(c, "geodesic", "theta_hat") : hat_theta(fc).principal;
  s.opt.tol = cnum(c, "geodesic", "tol", s.opt.tol);
  s.opt.max_iter = c.integer("geodesic", "max_iter", s.opt.max_iter);
  s.opt.uniform_samples = c.integer("geodesic", "samples", s.opt.uniform_samples);
  if (s.opt.uniform_samples < 5) c.fail_at("geodesic", "samples", "need at least five samples");
  return s;
}

inline std::string eps_dir(double e) { return "eps_" + fmt(e); }

inline OutputTable geodesic_phi_table(const GeodesicSolution& sol) {
  OutputTable t({"x", "s", "phi"});
  const auto nx = sol.phi.rows();
  for (Eigen::Index j = 0; j < sol.phi.cols(); ++j)
    for (Eigen::Index i = 0; i < nx; ++i)
      t.add_numbers({static_cast<double>(i) / static_cast<double>(nx), sol.s(j), sol.phi(i, j)});
  return t;
}

inline OutputTable estimates_table(const GeodesicEstimates& e) {
  OutputTable t({"quantity", "value"});
  auto row = [&](const char* k, double v) { t.add({k, fmt(v)}); };
  row("osc", e.osc);
  row("sup_phi", e.sup_phi);
  row("grad_x", e.grad_x);
  row("hess_x", e.hess_x);
  row("mixed", e.mixed);
  row("time", e.time);
  row("mixed_times_eps", e.mixed_scaled);
  row("time_times_eps2", e.time_scaled);
  return t;
}

inline RunResult run_geodesic(const RunOptions& o) {
  const Config c = Config::load(o.config.string());
  const GeodesicSetup setup = parse_geodesic(c);
  const size_t m = setup.epsilons.size();
  std::vector<std::optional<GeodesicSolution>> sols(m);
  std::vector<std::string> errors(m);
  parallel_for(m, o.jobs, [&](size_t k) {
    AnnulusGrid g = setup.grid;
    g.epsilon = setup.epsilons[k];
    try {
      sols[k] = solve_epsilon_geodesic(g, setup.theta_hat, setup.opt);
    } catch (const Error& e) {
      if (!solver_error(e.code())) throw;
      errors[k] = e.what();
    }
  });
  prepare_out(o);
  // per-epsilon directories, written after the join in list order
  OutputTable summary({"epsilon", "inv_eps2", "iterations", "residual", "converged", "start_gap", "hess_x", "grad_x",
                       "time", "time_times_eps2", "mixed_times_eps"});
  std::vector<GeodesicSolution> done;
  for (size_t k = 0; k < m; ++k) {
    const double e = setup.epsilons[k];
    if (!sols[k]) {
      summary.add({fmt(e), fmt(1 / (e * e)), "", "", "false", "", "", "", "", "", ""});
      continue;
    }
    const auto& s = *sols[k];
    RunOptions sub = o;
    sub.out = o.out / eps_dir(e);
    prepare_out(sub);
    geodesic_phi_table(s).write(sub.out / "phi.csv");
    residual_table(s.run).write(sub.out / "residuals.csv");
    functional_table(s.functionals).write(sub.out / "functionals.csv");
    convexity_table(second_difference_probe(s.functionals)).write(sub.out / "convexity.csv");
    estimates_table(s.estimates).write(sub.out / "estimates.csv");
    RunManifest sm("geodesic-slice");
    sm.set("geodesic", "epsilon", e);
    sm.set("geodesic", "theta_hat", setup.theta_hat);
    sm.set("geodesic", "s_nodes", std::to_string(setup.grid.s_nodes));
    sm.set("geodesic", "iterations", std::to_string(s.run.iterations));
    sm.set("geodesic", "note", s.run.note.empty() ? "newton" : s.run.note);
    sm.set("timing", "solve_seconds", s.run.wall_seconds);
    record_fiber(sm, setup.grid.geometry);
    record_conventions(sm);
    sm.write(sub.out, {"phi.csv", "residuals.csv", "functionals.csv", "convexity.csv", "estimates.csv"});
    const auto& est = s.estimates;
    summary.add({fmt(e), fmt(1 / (e * e)), std::to_string(s.run.iterations), fmt(s.run.residuals.back()), "true",
                 fmt(s.start_gap), fmt(est.hess_x), fmt(est.grad_x), fmt(est.time), fmt(est.time_scaled),
                 fmt(est.mixed_scaled)});
    done.push_back(s);
  }
  summary.write(o.out / "summary.csv");
  std::vector<std::string> artifacts{"config", "summary.csv"};
  for (size_t k = 0; k < m; ++k)
    if (sols[k]) artifacts.push_back(eps_dir(setup.epsilons[k]) + "/manifest");

  if (done.size() == m && m >= 2) {
    auto sc = estimate_scaling_study(done);
    OutputTable st({"quantity", "value"});
    st.add({"hess_variation", fmt(sc.hess_variation)});
    st.add({"grad_variation", fmt(sc.grad_variation)});
    st.add({"time_times_eps2_ratio", fmt(sc.time_ratio)});
    st.add({"mixed_times_eps_ratio", fmt(sc.mixed_ratio)});
    st.add({"spatial_uniform", sc.spatial_uniform ? "true" : "false"});
    st.add({"temporal_bounded", sc.temporal_bounded ? "true" : "false"});
    st.write(o.out / "scaling.csv");
    artifacts.push_back("scaling.csv");
  }
  std::string cauchy_note;
  if (done.size() == m && m >= 3) {
    OutputTable ct({"eps_coarse", "eps_fine", "sup_difference"});
    std::vector<double> sorted = setup.epsilons;
    std::sort(sorted.rbegin(), sorted.rend());
    try {
      auto w = weak_geodesic_extrapolate(done);
      for (size_t k = 0; k < w.cauchy.size(); ++k) ct.add_numbers({sorted[k], sorted[k + 1], w.cauchy[k]});
      convexity_table(second_difference_probe(w.functionals)).write(o.out / "weak_convexity.csv");
      artifacts.push_back("weak_convexity.csv");
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NotCauchy) throw;
      cauchy_note = e.what();
      for (size_t k = 1; k < sorted.size(); ++k) {
        const GeodesicSolution *a = nullptr, *b = nullptr;
        for (const auto& d : done) {
          if (d.epsilon == sorted[k - 1]) a = &d;
          if (d.epsilon == sorted[k]) b = &d;
        }
        ct.add_numbers({sorted[k - 1], sorted[k], (a->phi - b->phi).cwiseAbs().maxCoeff()});
      }
    }
    ct.write(o.out / "cauchy.csv");
    artifacts.push_back("cauchy.csv");
  }
  if (o.svg && !done.empty()) {
    const auto& f = *std::min_element(done.begin(), done.end(), [](auto& a, auto& b) { return a.epsilon < b.epsilon; });
    double lo = f.phi.minCoeff(), hi = f.phi.maxCoeff();
    Svg svg(0, 1, lo - 0.05 * (hi - lo + 1e-12), hi + 0.05 * (hi - lo + 1e-12));
    svg.axes();
    const char* colors[] = {"#1f77b4", "#2ca02c", "#ff7f0e", "#d62728", "#9467bd"};
    const auto ns = f.phi.cols(), nx = f.phi.rows();
    for (int q = 0; q < 5; ++q) {
      Eigen::Index j = q * (ns - 1) / 4;
      std::vector<std::pair<double, double>> pts;
      for (Eigen::Index i = 0; i <= nx; ++i)
        pts.emplace_back(static_cast<double>(i) / static_cast<double>(nx), f.phi(i % nx, j));
      svg.polyline(pts, colors[q]);
    }
    svg.text(0.02, hi, "phi(x, s) at s = 0, 1/4, 1/2, 3/4, 1 for eps = " + fmt(f.epsilon), 11);
    svg.write(o.out / "slices.svg");
    artifacts.push_back("slices.svg");
  }

  RunManifest man("geodesic");
  record_config(o, man, c);
  record_fiber(man, setup.grid.geometry);
  record_conventions(man);
  man.set("geodesic", "theta_hat", setup.theta_hat);
  man.set("geodesic", "s_nodes", std::to_string(setup.grid.s_nodes));
  man.set("geodesic", "radial", to_string(setup.grid.radial));
  std::string el;
  for (double e : setup.epsilons) el += (el.empty() ? "" : ",") + fmt(e);
  man.set("geodesic", "epsilons", el);
  man.set("geodesic", "tol", setup.opt.tol);
  man.set("conventions", "annulus", "s = -log|t| in [0, 1], metric omega + eps^2 i dt dtbar");
  if (!cauchy_note.empty()) man.set("geodesic", "cauchy", cauchy_note);
  man.write(o.out, artifacts);

  for (size_t k = 0; k < m; ++k)
    if (!sols[k]) return {kSolverFailure, "epsilon = " + fmt(setup.epsilons[k]) + ": " + errors[k]};
  if (!cauchy_note.empty()) return {kSolverFailure, cauchy_note};
  return {kOk, std::to_string(m) + " epsilon runs converged"};
}

// ---- model-curve ----
//   [model]  ideal = point | trivial, r = 1
//            delta = 0.05
//            s = 4, 8               # slope evaluation points
//            s_max = 8              # ray checked on 17 slices of [0, s_max]
//            scan = false, scan_hi = 4

inline Rational exact_of(const Config& c, const std::string& sec, const std::string& key) {
  try {
    return rational_from_decimal(c.str(sec, key));
  } catch (const Error&) {
    return Rational(cnum(c, sec, key));  // binary value, exact
  }
}

struct ModelCurveSetup {
  FiberGeometry geometry;
  FlagIdeal ideal;
  double delta = 0.0;
  Rational delta_exact;
  std::vector<double> s;
  double s_max = 8.0;
  double theta_hat = 0.0;
};

inline ModelCurveSetup parse_model(const Config& c) {
  ModelCurveSetup m;
  m.geometry = parse_fiber(c);
  const std::string ideal = c.str("model", "ideal", "point");
  if (ideal == "point") m.ideal.kind = FlagIdeal::Kind::Point;
  else if (ideal == "trivial") m.ideal.kind = FlagIdeal::Kind::Trivial;
  else c.fail_at("model", "ideal", "ideal is point or trivial");
  m.ideal.r = c.integer("model", "r", 1);
  m.delta = cnum(c, "model", "delta");
  if (!(m.delta > 0)) c.fail_at("model", "delta", "delta must be positive");
  m.delta_exact = exact_of(c, "model", "delta");
  m.s = cnums(c, "model", "s");
  m.s_max = cnum(c, "model", "s_max", *std::max_element(m.s.begin(), m.s.end()));
  FiberCalculus fc(m.geometry);
  m.theta_hat = c.has("model", "theta_hat") ? cnum(c, "model", "theta_hat") : hat_theta(fc).principal;
  return m;
}

// algebraic d/ds CY: -(delta/pi) E.(gamma - i delta E)^n from the ring engine for a point,
// -(delta r/pi) int (omega + i alpha)^n for the trivial ideal
struct AlgebraicSlope {
  std::complex<double> slope;
  std::string leading, e_value;
};

inline AlgebraicSlope algebraic_slope(const ModelCurveSetup& m) {
  AlgebraicSlope a;
  if (m.ideal.kind == FlagIdeal::Kind::Trivial) {
    FiberCalculus fc(m.geometry);
    a.slope = -(m.delta * m.ideal.r / std::numbers::pi) * fc.class_integral();
    a.leading = fmt(a.slope.real()) + (a.slope.imag() < 0 ? " - " : " + ") + fmt(std::abs(a.slope.imag())) + "i";
    a.e_value = a.leading;
    return a;
  }
  auto ring = IntersectionRing::projective(m.geometry.n);
  auto h = ring.divisor({{"H", 1}});
  auto s = model_curve_slope_subvariety(ring, ring.cycle("point"), h, h, m.delta_exact, true);
  a.slope = s.slope;
  a.leading = s.leading.str();
  a.e_value = s.e_value->str();
  return a;
}

inline RunResult run_model_curve(const RunOptions& o) {
  const Config c = Config::load(o.config.string());
  const ModelCurveSetup m = parse_model(c);
  ModelCurve mc(m.geometry.n, m.geometry.omega0, m.geometry.alpha0, m.ideal, m.delta);
  std::vector<SliceCheck> slices;
  std::string branch_error;
  try {
    slices = verify_ray(mc, m.theta_hat, slice_schedule(m.s_max));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DeltaTooLarge) throw;
    branch_error = e.what();
  }
  const auto alg = algebraic_slope(m);
  std::vector<cplx> num(m.s.size());
  parallel_for(m.s.size(), o.jobs, [&](size_t k) { num[k] = mc.cy_slope(m.s[k]); });

  prepare_out(o);
  OutputTable slope({"s", "re_numeric", "im_numeric", "re_algebraic", "im_algebraic", "ratio_re", "ratio_im"});
  for (size_t k = 0; k < m.s.size(); ++k) {
    cplx q = num[k] / alg.slope;
    slope.add_numbers({m.s[k], num[k].real(), num[k].imag(), alg.slope.real(), alg.slope.imag(), q.real(), q.imag()});
  }
  slope.write(o.out / "slope.csv");
  OutputTable algebra({"quantity", "value"});
  algebra.add({"delta", to_string(m.delta_exact)});
  algebra.add({"leading_term", alg.leading});
  algebra.add({"e_product", alg.e_value});
  algebra.add({"slope", fmt(alg.slope.real()) + (alg.slope.imag() < 0 ? " - " : " + ") + fmt(std::abs(alg.slope.imag())) + "i"});
  algebra.write(o.out / "algebra.csv");
  OutputTable branch({"s", "margin"});
  for (const auto& sl : slices) branch.add_numbers({sl.s, sl.margin});
  branch.write(o.out / "branch.csv");
  std::vector<std::string> artifacts{"config", "slope.csv", "algebra.csv", "branch.csv"};
  if (c.flag("model", "scan", false)) {
    auto scan = delta_max_scan(m.geometry.n, m.geometry.omega0, m.geometry.alpha0, m.ideal, m.theta_hat, m.s_max,
                               cnum(c, "model", "scan_hi", 4.0), c.integer("model", "scan_iterations", 30));
    OutputTable st({"delta_max", "exit_s"});
    st.add_numbers({scan.delta_max, scan.exit_s});
    st.write(o.out / "delta_scan.csv");
    artifacts.push_back("delta_scan.csv");
  }
  if (o.svg) {
    std::vector<std::pair<double, double>> pts;
    double lo = 0, hi = 0;
    std::vector<double> grid;
    for (int k = 0; k <= 40; ++k) grid.push_back(m.s_max * k / 40.0);
    std::vector<cplx> curve(grid.size());
    parallel_for(grid.size(), o.jobs, [&](size_t k) { curve[k] = mc.cy_slope(grid[k]); });
    for (size_t k = 0; k < grid.size(); ++k) {
      pts.emplace_back(grid[k], curve[k].imag());
      lo = std::min(lo, curve[k].imag());
      hi = std::max(hi, curve[k].imag());
    }
    lo = std::min(lo, alg.slope.imag());
    Svg svg(0, m.s_max, 1.1 * lo, std::max(hi, 0.1 * std::abs(lo)));
    svg.axes();
    svg.polyline(pts, "#1f77b4");
    svg.polyline({{0, alg.slope.imag()}, {m.s_max, alg.slope.imag()}}, "#d62728", true);
    svg.text(0.02 * m.s_max, 0.0, "Im d/ds CY (solid), algebraic slope (dashed)", 11);
    svg.write(o.out / "slope.svg");
    artifacts.push_back("slope.svg");
  }
  RunManifest man("model-curve");
  record_config(o, man, c);
  record_fiber(man, m.geometry);
  record_conventions(man);
  man.set("model", "ideal", m.ideal.kind == FlagIdeal::Kind::Point ? "point" : "trivial");
  man.set("model", "r", std::to_string(m.ideal.r));
  man.set("model", "delta", m.delta);
  man.set("model", "theta_hat", m.theta_hat);
  man.set("model", "s_max", m.s_max);
  man.set("conventions", "model_potential", "psi = log(e^{-2s} + rho)/(2 pi), rho = sum sin^2(pi x)/pi^2");
  man.set("conventions", "algebraic_slope", "-(delta/pi) E.(gamma - i delta E)^n, top-form products without 1/n!");
  if (!branch_error.empty()) man.set("model", "branch", branch_error);
  man.write(o.out, artifacts);
  if (!branch_error.empty()) return {kInputError, "DeltaTooLarge: " + branch_error};
  cplx q = num.back() / alg.slope;
  return {kOk, "slope at s = " + fmt(m.s.back()) + ": numeric/algebraic = " + fmt(q.real())};
}

}  // namespace dhym::lab
