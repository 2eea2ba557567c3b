#pragma once

// dhym-lab mirror
//
//   [mirror]  family = p1
//             k = 3, delta = 1
//             s = 0, 1, 3, 20
//             nodes = 191, margin = 0.05     # y grid on [margin, 2 - margin]
//
//   [mirror]  family = custom
//             phi = log(1 + exp(2*x1))       # convex potential on the x side, m = 1 or 2
//             f = -3*log(1 + exp(2*x1))      # section potential on the x side
//             y_lo = 0.05, y_hi = 1.95       # one entry per dimension
//             nodes = 101, x_box = 3         # convexity is sampled on [-x_box, x_box]^m
//             theta_tilde = 0                # optional special Lagrangian target

#include "dhym/lab/common.hpp"
#include "dhym/syz_mirror.hpp"

namespace dhym::lab {

inline ConvexFn convex_from_expr(const Expr& e, int m) {
  std::vector<Expr> g, h;
  for (int a = 1; a <= m; ++a) {
    g.push_back(e.derivative(a));
    for (int b = 1; b <= m; ++b) h.push_back(e.derivative(a).derivative(b));
  }
  auto vars = [](const RVecX& x) {
    Expr::Vars v{0, 0, 0, 0};
    for (Eigen::Index k = 0; k < x.size(); ++k) v[static_cast<size_t>(k)] = x(k);
    return v;
  };
  ConvexFn f;
  f.m = m;
  f.provenance = "expression";
  f.f = [e, vars](const RVecX& x) { return e(vars(x)); };
  f.grad = [g, m, vars](const RVecX& x) {
    RVecX out(m);
    for (int a = 0; a < m; ++a) out(a) = g[static_cast<size_t>(a)](vars(x));
    return out;
  };
  f.hess = [h, m, vars](const RVecX& x) {
    RMatX out(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) out(a, b) = h[static_cast<size_t>(a * m + b)](vars(x));
    return out;
  };
  return f;
}

inline std::function<RVecX(const RVecX&)> gradient_from_expr(const Expr& e, int m) {
  std::vector<Expr> g;
  for (int a = 1; a <= m; ++a) g.push_back(e.derivative(a));
  return [g, m](const RVecX& x) {
    Expr::Vars v{0, 0, 0, 0};
    for (Eigen::Index k = 0; k < x.size(); ++k) v[static_cast<size_t>(k)] = x(k);
    RVecX out(m);
    for (int a = 0; a < m; ++a) out(a) = g[static_cast<size_t>(a)](v);
    return out;
  };
}

inline std::string s_file(double s) { return "section_s" + fmt(s) + ".csv"; }

struct P1Run {
  int k = 3;
  double delta = 1.0;
  std::vector<double> s;
  SectionGrid grid;
  std::vector<LagrangianSectionField> sections;
  std::vector<double> formula_gap;  // sup |LYZ - displayed family|
  std::vector<double> limit_gap;    // sup |section - limit|
  double legendre_gap = 0.0;        // sup |numeric u - closed form|
};

inline P1Run p1_run(const Config& c, int jobs) {
  P1Run r;
  r.k = c.integer("mirror", "k", 3);
  r.delta = cnum(c, "mirror", "delta", 1.0);
  if (r.delta < 0) c.fail_at("mirror", "delta", "delta must be nonnegative");
  r.s = c.has("mirror", "s") ? cnums(c, "mirror", "s") : std::vector<double>{0, 1, 3, 20};
  const double margin = cnum(c, "mirror", "margin", 0.05);
  const int nodes = c.integer("mirror", "nodes", 191);
  if (!(margin > 0 && margin < 1)) c.fail_at("mirror", "margin", "margin must lie in (0, 1)");
  if (nodes < 3) c.fail_at("mirror", "nodes", "need at least three nodes");
  r.grid = SectionGrid::interval(margin, 2 - margin, nodes);
  const ConvexFn u = legendre(p1_potential());
  r.sections.resize(r.s.size());
  parallel_for(r.s.size(), jobs, [&](size_t i) {
    r.sections[i] = lyz_section(u, pull_gradient(u, p1_family_x_gradient(r.k, r.delta, r.s[i])), r.grid);
  });
  for (size_t i = 0; i < r.s.size(); ++i) {
    double fg = 0, lg = 0;
    for (size_t p = 0; p < r.grid.size(); ++p) {
      const double y = r.grid.point(p)(0), th = r.sections[i].theta[p](0);
      fg = std::max(fg, std::abs(th - p1_model_family(r.k, r.delta, r.s[i], y)));
      lg = std::max(lg, std::abs(th - p1_model_limit(r.k, r.delta, y)));
    }
    r.formula_gap.push_back(fg);
    r.limit_gap.push_back(lg);
  }
  for (size_t p = 0; p < r.grid.size(); ++p) {
    const double y = r.grid.point(p)(0);
    r.legendre_gap = std::max(r.legendre_gap, std::abs(u.f(RVecX::Constant(1, y)) - p1_symplectic_closed_form(y)));
  }
  return r;
}

inline std::vector<std::string> write_p1(const P1Run& r, const RunOptions& o) {
  std::vector<std::string> artifacts;
  for (size_t i = 0; i < r.s.size(); ++i) {
    OutputTable t({"y", "theta_tilde"});
    for (size_t p = 0; p < r.grid.size(); ++p) t.add_numbers({r.grid.point(p)(0), r.sections[i].theta[p](0)});
    t.write(o.out / s_file(r.s[i]));
    artifacts.push_back(s_file(r.s[i]));
  }
  OutputTable lim({"y", "theta_tilde"});
  for (size_t p = 0; p < r.grid.size(); ++p) {
    const double y = r.grid.point(p)(0);
    lim.add_numbers({y, p1_model_limit(r.k, r.delta, y)});
  }
  lim.write(o.out / "limit.csv");
  OutputTable fam({"s", "sup_vs_family_formula", "sup_vs_limit"});
  for (size_t i = 0; i < r.s.size(); ++i) fam.add_numbers({r.s[i], r.formula_gap[i], r.limit_gap[i]});
  fam.write(o.out / "family.csv");
  // the limit against the line -k y at the two ends of the polytope
  OutputTable gaps({"end", "y", "limit", "line", "gap"});
  for (double y : {0.0, 2.0}) {
    const double l = p1_model_limit(r.k, r.delta, y), line = -r.k * y;
    gaps.add({y == 0.0 ? "left" : "right", fmt(y), fmt(l), fmt(line), fmt(std::abs(l - line))});
  }
  gaps.write(o.out / "gaps.csv");
  OutputTable sym({"quantity", "value"});
  sym.add({"sup_numeric_minus_closed_form_u", fmt(r.legendre_gap)});
  sym.write(o.out / "symplectic.csv");
  artifacts.insert(artifacts.end(), {"limit.csv", "family.csv", "gaps.csv", "symplectic.csv"});
  if (o.svg) {
    const double lo = -2.0 * r.k - 4 * r.delta - 0.5, hi = 0.5 + r.delta;
    Svg svg(0, 2, lo, hi);
    svg.axes();
    const char* colors[] = {"#1f77b4", "#2ca02c", "#ff7f0e", "#d62728", "#9467bd", "#8c564b"};
    for (size_t i = 0; i < r.s.size(); ++i) {
      std::vector<std::pair<double, double>> pts;
      for (size_t p = 0; p < r.grid.size(); ++p) pts.emplace_back(r.grid.point(p)(0), r.sections[i].theta[p](0));
      svg.polyline(pts, colors[i % 6]);
      svg.text(pts.back().first, pts.back().second, "s=" + fmt(r.s[i]), 10);
    }
    std::vector<std::pair<double, double>> lim_pts, line;
    for (int q = 0; q <= 200; ++q) {
      const double y = 2.0 * q / 200;
      lim_pts.emplace_back(y, p1_model_limit(r.k, r.delta, y));
      line.emplace_back(y, -r.k * y);
    }
    svg.polyline(lim_pts, "#000000", true);
    svg.polyline(line, "#bbbbbb", false, 0.8);
    svg.text(0.05, hi - 0.1, "sections y -> theta(y); limit dashed; gaps " + fmt(4 * r.delta) + " and " + fmt(2 * r.delta), 11);
    svg.write(o.out / "sections.svg");
    artifacts.push_back("sections.svg");
  }
  return artifacts;
}

struct CustomRun {
  int m = 1;
  SectionGrid grid;
  LagrangianSectionField section;
  std::optional<SlagResidual> slag;
  std::optional<double> theta_tilde;
};

inline CustomRun custom_run(const Config& c) {
  CustomRun r;
  Expr phi = expr_at(c, "mirror", "phi"), f = expr_at(c, "mirror", "f");
  r.m = c.integer("mirror", "m", std::max(1, std::max(phi.arity(), f.arity())));
  if (r.m < 1 || r.m > 2) c.fail_at("mirror", "phi", "custom potentials need m = 1 or 2");
  if (phi.arity() > r.m || f.arity() > r.m) c.fail_at("mirror", "f", "expression uses a coordinate beyond m");
  auto lo = cnums(c, "mirror", "y_lo"), hi = cnums(c, "mirror", "y_hi");
  if (static_cast<int>(lo.size()) != r.m || static_cast<int>(hi.size()) != r.m)
    c.fail_at("mirror", "y_lo", "need one bound per dimension");
  const int nodes = c.integer("mirror", "nodes", r.m == 1 ? 101 : 21);
  if (nodes < 3) c.fail_at("mirror", "nodes", "need at least three nodes");
  r.grid.dims.assign(static_cast<size_t>(r.m), nodes);
  r.grid.lo = Eigen::Map<RVecX>(lo.data(), r.m);
  r.grid.hi = Eigen::Map<RVecX>(hi.data(), r.m);
  for (int a = 0; a < r.m; ++a)
    if (!(hi[static_cast<size_t>(a)] > lo[static_cast<size_t>(a)])) c.fail_at("mirror", "y_hi", "y_hi must exceed y_lo");

  ConvexFn p = convex_from_expr(phi, r.m);
  const double box = cnum(c, "mirror", "x_box", 3.0);
  std::vector<RVecX> samples;
  const int per = 21;
  for (int i = 0; i < (r.m == 1 ? per : per * per); ++i) {
    RVecX x(r.m);
    x(0) = -box + 2 * box * (i % per) / (per - 1);
    if (r.m == 2) x(1) = -box + 2 * box * (i / per) / (per - 1);
    samples.push_back(x);
  }
  check_convex(p, samples);
  ConvexFn u = legendre(p);
  r.section = lyz_section(u, pull_gradient(u, gradient_from_expr(f, r.m)), r.grid);
  if (c.has("mirror", "theta_tilde")) {
    r.theta_tilde = cnum(c, "mirror", "theta_tilde");
    r.slag = slag_residual(r.section, *r.theta_tilde);
  } else {
    r.slag = slag_residual(r.section, 0.0);
  }
  return r;
}

inline std::vector<std::string> write_custom(const CustomRun& r, const RunOptions& o) {
  std::vector<std::string> cols, scols;
  for (int a = 0; a < r.m; ++a) cols.push_back("y" + std::to_string(a + 1));
  scols = cols;
  for (int a = 0; a < r.m; ++a) cols.push_back(r.m == 1 ? "theta_tilde" : "theta_tilde" + std::to_string(a + 1));
  scols.push_back("phase");
  if (r.theta_tilde) scols.push_back("residual");
  OutputTable sec(cols), sl(scols);
  for (size_t p = 0; p < r.grid.size(); ++p) {
    std::vector<double> row, srow;
    RVecX y = r.grid.point(p);
    for (int a = 0; a < r.m; ++a) row.push_back(y(a));
    srow = row;
    for (int a = 0; a < r.m; ++a) row.push_back(r.section.theta[p](a));
    srow.push_back(r.slag->phase(static_cast<Eigen::Index>(p)));
    if (r.theta_tilde) srow.push_back(r.slag->residual(static_cast<Eigen::Index>(p)));
    sec.add_numbers(row);
    sl.add_numbers(srow);
  }
  sec.write(o.out / "section.csv");
  sl.write(o.out / "slag.csv");
  std::vector<std::string> artifacts{"section.csv", "slag.csv"};
  if (o.svg && r.m == 1) {
    std::vector<std::pair<double, double>> pts;
    double lo = 1e300, hi = -1e300;
    for (size_t p = 0; p < r.grid.size(); ++p) {
      pts.emplace_back(r.grid.point(p)(0), r.section.theta[p](0));
      lo = std::min(lo, r.section.theta[p](0));
      hi = std::max(hi, r.section.theta[p](0));
    }
    double pad = 0.05 * (hi - lo) + 1e-9;
    Svg svg(r.grid.lo(0), r.grid.hi(0), lo - pad, hi + pad);
    svg.axes();
    svg.polyline(pts, "#1f77b4");
    svg.write(o.out / "sections.svg");
    artifacts.push_back("sections.svg");
  }
  return artifacts;
}

inline RunResult run_mirror(const RunOptions& o) {
  const Config c = Config::load(o.config.string());
  const std::string family = c.str("mirror", "family", "p1");
  RunManifest man("mirror");
  std::vector<std::string> artifacts{"config"};
  std::string message;
  if (family == "p1") {
    P1Run r = p1_run(c, o.jobs);
    prepare_out(o);
    auto a = write_p1(r, o);
    artifacts.insert(artifacts.end(), a.begin(), a.end());
    man.set("mirror", "family", "p1");
    man.set("mirror", "k", std::to_string(r.k));
    man.set("mirror", "delta", r.delta);
    man.set("mirror", "nodes", std::to_string(r.grid.dims[0]));
    man.set("mirror", "y_range", fmt(r.grid.lo(0)) + "," + fmt(r.grid.hi(0)));
    man.set("conventions", "potential", "phi = log(1 + e^{2x}), moment image (0, 2)");
    man.set("conventions", "family", "x-side f = -k phi - delta log(e^{4x}/(1+e^{2x})^3 + e^{-2s})");
    message = std::to_string(r.s.size()) + " sections, sup vs limit at s = " + fmt(r.s.back()) + ": " + fmt(r.limit_gap.back());
  } else if (family == "custom") {
    CustomRun r;
    try {
      r = custom_run(c);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NotConvex || e.code() == ErrorCode::NotConverged || e.code() == ErrorCode::SingularHessian)
        return {kInputError, e.what()};
      throw;
    }
    prepare_out(o);
    auto a = write_custom(r, o);
    artifacts.insert(artifacts.end(), a.begin(), a.end());
    man.set("mirror", "family", "custom");
    man.set("mirror", "phi", c.str("mirror", "phi"));
    man.set("mirror", "f", c.str("mirror", "f"));
    man.set("mirror", "m", std::to_string(r.m));
    if (r.theta_tilde) man.set("mirror", "theta_tilde", *r.theta_tilde);
    message = "section on " + std::to_string(r.grid.size()) + " nodes, sup slag residual " + fmt(r.slag->sup);
  } else {
    c.fail_at("mirror", "family", "family is p1 or custom");
  }
  record_config(o, man, c);
  man.set("conventions", "legendre", "numeric Legendre transform by damped Newton; sections on the universal cover");
  man.write(o.out, artifacts);
  return {kOk, message};
}

}  // namespace dhym::lab
