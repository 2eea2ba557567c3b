#pragma once

// dhym-lab stability
//
//   [ring]     builtin = blp3 | file = my.ring
//   [classes]  omega = 2 H - E
//              L = a H - b E          # a, b name [sweep] parameters; plain rationals also work
//              cycles = E, plane      # optional, default every proper positive-dimensional cycle
//   [sweep]    a = 5                  # single value, list "1, 2, 5/2" or range "0.301:0.599:0.001"
//              b = 3

#include <algorithm>
#include <cctype>
#include <map>
#include <numbers>
#include <optional>

#include "dhym/lab/common.hpp"
#include "dhym/stability.hpp"

namespace dhym::lab {

// linear combination of generators with coefficients that may carry one sweep parameter
class ClassTemplate {
 public:
  struct Term {
    Rational coef;
    std::string param;  // empty for a constant term
    int gen = 0;
  };

  static ClassTemplate parse(const std::string& text, const IntersectionRing& ring,
                             const std::vector<std::string>& params) {
    ClassTemplate t;
    std::vector<std::pair<int, std::string>> pieces;  // sign, body
    int sign = 1;
    std::string cur;
    for (size_t k = 0; k < text.size(); ++k) {
      const char c = text[k];
      const bool exponent = k > 1 && (text[k - 1] == 'e' || text[k - 1] == 'E') &&
                            std::isdigit(static_cast<unsigned char>(text[k - 2]));
      if ((c == '+' || c == '-') && !exponent) {
        if (!trim(cur).empty()) {
          pieces.emplace_back(sign, trim(cur));
          cur.clear();
          sign = 1;
        }
        if (c == '-') sign = -sign;
      } else {
        cur += c;
      }
    }
    if (trim(cur).empty()) throw Error(ErrorCode::ParseError, "empty or dangling term in '" + text + "'");
    pieces.emplace_back(sign, trim(cur));
    for (auto& [sg, body] : pieces) {
      std::string b = body;
      std::replace(b.begin(), b.end(), '*', ' ');
      std::istringstream in(b);
      std::vector<std::string> tok;
      for (std::string w; in >> w;) tok.push_back(w);
      if (tok.empty()) throw Error(ErrorCode::ParseError, "empty term in '" + text + "'");
      Term term{Rational(sg), "", 0};
      // "5H" and "3/2E" carry the coefficient glued to the generator
      const auto& gens = ring.generators();
      if (std::find(gens.begin(), gens.end(), tok.back()) == gens.end())
        for (size_t k = 1; k < tok.back().size(); ++k)
          if (std::find(gens.begin(), gens.end(), tok.back().substr(k)) != gens.end()) {
            std::string head = tok.back().substr(0, k), g = tok.back().substr(k);
            tok.back() = head;
            tok.push_back(g);
            break;
          }
      try {
        term.gen = ring.generator(tok.back());
      } catch (const Error&) {
        throw Error(ErrorCode::ParseError, "unknown generator '" + tok.back() + "' in '" + text + "'");
      }
      for (size_t k = 0; k + 1 < tok.size(); ++k) {
        if (std::find(params.begin(), params.end(), tok[k]) != params.end()) {
          if (!term.param.empty()) throw Error(ErrorCode::ParseError, "two parameters in one term of '" + text + "'");
          term.param = tok[k];
        } else {
          term.coef *= rational_from_decimal(tok[k]);
        }
      }
      t.terms_.push_back(term);
    }
    t.size_ = ring.generators().size();
    return t;
  }

  DivisorClass at(const std::map<std::string, Rational>& values) const {
    DivisorClass d{std::vector<Rational>(size_)};
    for (const auto& t : terms_) {
      Rational c = t.coef;
      if (!t.param.empty()) c *= values.at(t.param);
      d.c[static_cast<size_t>(t.gen)] += c;
    }
    return d;
  }

 private:
  std::vector<Term> terms_;
  size_t size_ = 0;
};

inline std::vector<Rational> parse_sweep_values(const Config& c, const std::string& key) {
  const std::string text = c.str("sweep", key);
  std::vector<Rational> out;
  try {
    if (text.find(':') != std::string::npos) {
      auto parts = split_list(text, ':');
      if (parts.size() != 3) c.fail_at("sweep", key, "range must be lo:hi:step");
      Rational lo = rational_from_decimal(parts[0]), hi = rational_from_decimal(parts[1]),
               step = rational_from_decimal(parts[2]);
      if (!(step > 0) || hi < lo) c.fail_at("sweep", key, "range needs lo <= hi and step > 0");
      if ((hi - lo) / step > 1000000) c.fail_at("sweep", key, "range has more than 10^6 points");
      for (Rational v = lo; v <= hi; v += step) out.push_back(v);
    } else {
      for (const auto& t : split_list(text)) out.push_back(rational_from_decimal(t));
    }
  } catch (const Error& e) {
    if (std::string(e.what()).find(": line ") != std::string::npos) throw;
    c.fail_at("sweep", key, e.what());
  }
  if (out.empty()) c.fail_at("sweep", key, "no values");
  return out;
}

struct StabilityRow {
  std::map<std::string, Rational> params;
  StabilityVerdict verdict;
  std::string error;  // NonKaehler or similar for this class
};

inline int exit_for(const StabilityVerdict& v) {
  if (v.status == VerdictStatus::Candidate) return kOk;
  if (v.status == VerdictStatus::AngleUndefined) return kAngleUndefined;
  return kObstructed;
}

inline double min_margin(const StabilityVerdict& v, const std::vector<std::string>& checks) {
  double m = std::numeric_limits<double>::quiet_NaN();
  for (const auto& g : v.margins)
    if (std::find(checks.begin(), checks.end(), g.check) != checks.end()) m = std::isnan(m) ? g.value : std::min(m, g.value);
  return m;
}

inline void zpath_svg(const IntersectionRing& ring, const DivisorClass& l, const DivisorClass& omega,
                      const std::vector<Cycle>& cycles, const fs::path& file) {
  // Z_V(t) for t in [0, 1] (t = 1 marked) with the half-plane Im Z > 0 shaded and the quadrant
  // Re < 0 < Im, where Z_X(1) must land, shaded darker
  std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> paths;
  double lo_x = -1, hi_x = 1, lo_y = -1, hi_y = 1;
  std::vector<Cycle> all{ring.fundamental()};
  all.insert(all.end(), cycles.begin(), cycles.end());
  for (const auto& c : all) {
    auto z = charge_path(ring, c, l, omega);
    std::vector<std::pair<double, double>> pts;
    for (int k = 0; k <= 200; ++k) {
      auto v = z.eval(k / 200.0);
      pts.emplace_back(v.real(), v.imag());
      lo_x = std::min(lo_x, v.real());
      hi_x = std::max(hi_x, v.real());
      lo_y = std::min(lo_y, v.imag());
      hi_y = std::max(hi_y, v.imag());
    }
    paths.emplace_back(c.name, pts);
  }
  double px = 0.08 * (hi_x - lo_x), py = 0.08 * (hi_y - lo_y);
  Svg svg(lo_x - px, hi_x + px, lo_y - py, hi_y + py);
  svg.polygon({{lo_x - px, 0}, {hi_x + px, 0}, {hi_x + px, hi_y + py}, {lo_x - px, hi_y + py}}, "#eeeeee");
  svg.polygon({{lo_x - px, 0}, {0, 0}, {0, hi_y + py}, {lo_x - px, hi_y + py}}, "#cccccc");
  svg.axes();
  const char* colors[] = {"#000000", "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  for (size_t k = 0; k < paths.size(); ++k) {
    const auto& c = colors[k % 7];
    svg.polyline(paths[k].second, c);
    svg.dot(paths[k].second.back().first, paths[k].second.back().second, c);
    svg.text(paths[k].second.back().first, paths[k].second.back().second, "Z_" + paths[k].first + "(1)", 11);
  }
  svg.write(file);
}

inline RunResult run_stability(const RunOptions& o) {
  const Config c = Config::load(o.config.string());
  IntersectionRing ring;
  std::string ring_text;
  RunManifest man("stability");
  if (c.has("ring", "builtin") == c.has("ring", "file"))
    throw Error(ErrorCode::ParseError, c.origin() + ": [ring] needs exactly one of builtin, file");
  if (c.has("ring", "builtin")) {
    try {
      ring = IntersectionRing::builtin(c.str("ring", "builtin"));
    } catch (const Error& e) {
      c.fail_at("ring", "builtin", e.what());
    }
    man.set("ring", "builtin", c.str("ring", "builtin"));
  } else {
    fs::path p = o.ring_override.empty() ? o.config.parent_path() / c.str("ring", "file") : o.ring_override;
    try {
      ring = IntersectionRing::load(p.string());
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, p.string() + ": " + strip_code(e.what()));
    }
    ring_text = read_file(p);
    man.set("ring", "file", p.string());
  }

  std::vector<std::string> params;
  if (c.has_section("sweep"))
    for (const auto& [k, v] : c.data().at("sweep")) params.push_back(k);
  ClassTemplate lt, wt;
  try {
    lt = ClassTemplate::parse(c.str("classes", "L"), ring, params);
  } catch (const Error& e) {
    c.fail_at("classes", "L", e.what());
  }
  try {
    wt = ClassTemplate::parse(c.str("classes", "omega"), ring, {});
  } catch (const Error& e) {
    c.fail_at("classes", "omega", e.what());
  }
  const DivisorClass omega = wt.at({});
  std::vector<Cycle> cycles;
  if (c.has("classes", "cycles")) {
    for (const auto& name : split_list(c.str("classes", "cycles"))) {
      try {
        cycles.push_back(ring.cycle(name));
      } catch (const Error& e) {
        c.fail_at("classes", "cycles", e.what());
      }
    }
  } else {
    cycles = classification_cycles(ring);
  }

  // parameter grid, first parameter varies slowest
  std::vector<std::map<std::string, Rational>> grid{{}};
  for (const auto& p : params) {
    auto vals = parse_sweep_values(c, p);
    std::vector<std::map<std::string, Rational>> next;
    for (const auto& g : grid)
      for (const auto& v : vals) {
        auto h = g;
        h[p] = v;
        next.push_back(h);
      }
    grid = std::move(next);
  }

  std::vector<StabilityRow> rows(grid.size());
  parallel_for(grid.size(), o.jobs, [&](size_t i) {
    rows[i].params = grid[i];
    try {
      rows[i].verdict = stability_classify(ring, lt.at(grid[i]), omega, cycles);
    } catch (const Error& e) {
      rows[i].error = std::string(to_string(e.code()));
    }
  });

  prepare_out(o);
  std::vector<std::string> pcols(params.begin(), params.end());
  auto with_params = [&](std::vector<std::string> tail) {
    std::vector<std::string> cols = pcols;
    cols.insert(cols.end(), tail.begin(), tail.end());
    return cols;
  };
  OutputTable verdicts(with_params({"status", "subject", "margin_chern", "margin_zx", "margin_zv", "margin_phase", "phi_X"}));
  OutputTable exact(with_params({"chern_lhs", "chern_rhs", "chern_holds", "re_zx", "im_zx", "crossing_cycle", "crossing_t_lo",
                                 "crossing_t_hi", "roots_on_ray"}));
  OutputTable charges(with_params({"cycle", "dim", "re_z1", "im_z1", "angle_defined", "lifted_angle", "slicing_angle"}));
  int code = kOk;
  std::string first_bad;
  for (const auto& r : rows) {
    std::vector<std::string> pv;
    for (const auto& p : params) pv.push_back(to_string(r.params.at(p)));
    auto row = [&](std::vector<std::string> tail) {
      auto v = pv;
      v.insert(v.end(), tail.begin(), tail.end());
      return v;
    };
    if (!r.error.empty()) {
      verdicts.add(row({r.error, "", "nan", "nan", "nan", "nan", "nan"}));
      exact.add(row({"", "", "", "", "", "", "", "", ""}));
      if (first_bad.empty()) first_bad = r.error;
      continue;
    }
    const auto& v = r.verdict;
    auto phix = v.slicing.count("X") ? fmt(v.slicing.at("X")) : std::string("nan");
    verdicts.add(row({to_string(v.status), v.subject, fmt(min_margin(v, {"chern"})), fmt(min_margin(v, {"zx_im", "zx_neg_re"})),
                      fmt(min_margin(v, {"zv_im"})), fmt(min_margin(v, {"phase"})), phix}));
    std::string cc, lo, hi, roots;
    for (const auto& [name, a] : v.angles)
      if (a.crossing && cc.empty()) {
        cc = name;
        lo = to_string(a.crossing->t.lo);
        hi = to_string(a.crossing->t.hi);
        roots = std::to_string(a.crossing->roots_on_ray);
      }
    const CRational zx = v.charge.at("X");
    exact.add(row({ring.dim() == 3 ? to_string(v.chern.lhs) : "", ring.dim() == 3 ? to_string(v.chern.rhs) : "",
                   ring.dim() == 3 ? (v.chern.holds ? "true" : "false") : "", to_string(zx.re), to_string(zx.im), cc, lo, hi,
                   roots}));
    if (rows.size() == 1 || params.empty()) {
      std::vector<Cycle> all{ring.fundamental()};
      all.insert(all.end(), cycles.begin(), cycles.end());
      for (const auto& cy : all) {
        const auto& a = v.angles.at(cy.name);
        const CRational z = v.charge.at(cy.name);
        charges.add(row({cy.name, std::to_string(cy.dim), to_string(z.re), to_string(z.im), a.defined ? "true" : "false",
                         a.defined ? fmt(a.angle) : "nan", a.defined ? fmt(v.slicing.at(cy.name)) : "nan"}));
      }
    }
    int e = exit_for(v);
    if (e == kAngleUndefined || (e == kObstructed && code != kAngleUndefined)) code = e;
    if (e != kOk && first_bad.empty()) first_bad = v.label();
  }
  bool any_error = std::any_of(rows.begin(), rows.end(), [](const StabilityRow& r) { return !r.error.empty(); });

  std::vector<std::string> artifacts{"config", "verdict.csv", "exact.csv"};
  verdicts.write(o.out / "verdict.csv");
  exact.write(o.out / "exact.csv");
  if (!charges.rows().empty()) {
    charges.write(o.out / "charges.csv");
    artifacts.push_back("charges.csv");
  }
  if (ring.dim() == 4) {
    OutputTable c4(with_params({"applicable", "ratio", "ratio_gt_1", "second", "second_lt_0"}));
    for (const auto& r : rows) {
      if (!r.error.empty()) continue;
      std::vector<std::string> pv;
      for (const auto& p : params) pv.push_back(to_string(r.params.at(p)));
      auto ch = chern_inequalities_4d(ring, lt.at(r.params), omega);
      pv.insert(pv.end(), {ch.applicable ? "true" : "false", to_string(ch.ratio), ch.first_holds ? "true" : "false",
                           to_string(ch.second), ch.second_holds ? "true" : "false"});
      c4.add(pv);
    }
    c4.write(o.out / "chern4.csv");
    artifacts.push_back("chern4.csv");
  }
  if (!ring_text.empty()) {
    write_file(o.out / "ring", ring_text);
    artifacts.push_back("ring");
  }
  if (o.svg && !rows.empty() && rows.front().error.empty()) {
    zpath_svg(ring, lt.at(rows.front().params), omega, cycles, o.out / "zpath.svg");
    artifacts.push_back("zpath.svg");
  }

  record_config(o, man, c);
  man.set("ring", "name", ring.name());
  man.set("ring", "dim", std::to_string(ring.dim()));
  man.set("classes", "omega", c.str("classes", "omega"));
  man.set("classes", "L", c.str("classes", "L"));
  std::string cl;
  for (const auto& cy : cycles) cl += (cl.empty() ? "" : ",") + cy.name;
  man.set("classes", "cycles", cl);
  man.set("classes", "count", std::to_string(rows.size()));
  man.set("conventions", "charge", "Z_V(t) = -int_V e^{-i t omega} ch(L), coefficients from the ring");
  man.set("conventions", "lifted_angle", "winding of tau^p Z(1/tau) over tau in [0,1]; phi_V = angle - (p-2) pi/2");
  man.set("conventions", "crossing", "exact: Sturm count of gcd(Re Z, Im Z) on [1, inf)");
  man.set("conventions", "sweep_exit", "11 if any class has an undefined angle, else 10 if any is obstructed");
  man.write(o.out, artifacts);

  if (any_error) return {kInputError, "class outside the Kaehler cone or invalid: " + first_bad};
  if (rows.size() == 1) return {code, rows.front().verdict.label()};
  size_t cand = static_cast<size_t>(std::count_if(rows.begin(), rows.end(), [](const StabilityRow& r) {
    return r.verdict.status == VerdictStatus::Candidate;
  }));
  return {code, std::to_string(cand) + "/" + std::to_string(rows.size()) + " candidates" +
                    (first_bad.empty() ? "" : ", first failure " + first_bad)};
}

}  // namespace dhym::lab
