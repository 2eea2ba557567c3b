#pragma once

// Exact intersection rings, central-charge paths, lifted angles and the stability checks.
//
// Intersection numbers are top-form integrals (H^3 = 1 on P^3, no 1/n!).
// Z_V(t) = -int_V e^{-i t omega} ch(L); the t^{p-k} coefficient is
//   -(-i)^{p-k} / ((p-k)! k!) omega^{p-k} L^k V.
// The lifted angle is the winding of Z_V from t = infinity down to t = 1.

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dhym/error.hpp"
#include "dhym/rational_poly.hpp"

namespace dhym {

struct CRational {
  Rational re = 0, im = 0;

  friend CRational operator+(const CRational& a, const CRational& b) { return {a.re + b.re, a.im + b.im}; }
  friend CRational operator-(const CRational& a, const CRational& b) { return {a.re - b.re, a.im - b.im}; }
  friend CRational operator*(const CRational& a, const CRational& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend CRational operator*(const CRational& a, const Rational& s) { return {a.re * s, a.im * s}; }
  friend bool operator==(const CRational& a, const CRational& b) { return a.re == b.re && a.im == b.im; }
  std::complex<double> value() const { return {to_double(re), to_double(im)}; }
  std::string str() const { return to_string(re) + (im < 0 ? " - " : " + ") + to_string(Rational(abs(im))) + "i"; }

  static CRational i_power(int k) {
    switch (((k % 4) + 4) % 4) {
      case 0: return {1, 0};
      case 1: return {0, 1};
      case 2: return {-1, 0};
      default: return {0, -1};
    }
  }
};

inline Rational factorial(int k) {
  Rational f = 1;
  for (int j = 2; j <= k; ++j) f *= j;
  return f;
}
inline Rational binomial(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

struct DivisorClass {
  std::vector<Rational> c;
  friend DivisorClass operator+(const DivisorClass& a, const DivisorClass& b) {
    DivisorClass r{a.c};
    for (size_t i = 0; i < r.c.size(); ++i) r.c[i] += b.c[i];
    return r;
  }
  friend DivisorClass operator*(const DivisorClass& a, const Rational& s) {
    DivisorClass r{a.c};
    for (auto& x : r.c) x *= s;
    return r;
  }
  bool is_zero() const {
    return std::all_of(c.begin(), c.end(), [](const Rational& x) { return x == 0; });
  }
};

// V = sum coef * G_1 ... G_{n-p}
struct Cycle {
  std::string name;
  int dim = 0;
  std::vector<std::pair<Rational, std::vector<int>>> terms;
};

class IntersectionRing {
 public:
  IntersectionRing() = default;
  IntersectionRing(int dim, std::vector<std::string> gens) : dim_(dim), gens_(std::move(gens)) {
    if (dim_ < 1) throw Error(ErrorCode::WrongDimension, "ring dimension must be positive");
  }

  int dim() const { return dim_; }
  const std::vector<std::string>& generators() const { return gens_; }
  const std::vector<Cycle>& cycles() const { return cycles_; }
  const std::string& name() const { return name_; }
  void set_name(std::string n) { name_ = std::move(n); }

  int generator(const std::string& g) const {
    auto it = std::find(gens_.begin(), gens_.end(), g);
    if (it == gens_.end()) throw Error(ErrorCode::ParseError, "unknown generator " + g);
    return static_cast<int>(it - gens_.begin());
  }

  // value for the multiset of generator indices; permutations must agree
  void set_form(std::vector<int> idx, const Rational& v) {
    if (static_cast<int>(idx.size()) != dim_) throw Error(ErrorCode::ParseError, "form entry needs dim generators");
    std::sort(idx.begin(), idx.end());
    auto it = form_.find(idx);
    if (it != form_.end() && it->second != v)
      throw Error(ErrorCode::ParseError, "form is not symmetric: conflicting values for a permutation");
    form_[idx] = v;
  }
  Rational form(std::vector<int> idx) const {
    std::sort(idx.begin(), idx.end());
    auto it = form_.find(idx);
    return it == form_.end() ? Rational(0) : it->second;
  }

  void add_cycle(Cycle c) {
    if (c.dim < 0 || c.dim > dim_) throw Error(ErrorCode::WrongDimension, "cycle " + c.name + " has invalid dimension");
    for (const auto& t : c.terms)
      if (static_cast<int>(t.second.size()) != dim_ - c.dim)
        throw Error(ErrorCode::WrongDimension, "cycle " + c.name + " term has wrong codimension");
    cycles_.push_back(std::move(c));
  }
  Cycle fundamental() const { return {"X", dim_, {{Rational(1), {}}}}; }
  const Cycle& cycle(const std::string& n) const {
    for (const auto& c : cycles_)
      if (c.name == n) return c;
    throw Error(ErrorCode::ParseError, "unknown cycle " + n);
  }
  Cycle find_cycle(const std::string& n) const { return n == "X" ? fundamental() : cycle(n); }

  DivisorClass divisor(const std::map<std::string, Rational>& coeffs) const {
    DivisorClass d{std::vector<Rational>(gens_.size())};
    for (const auto& [g, v] : coeffs) d.c[static_cast<size_t>(generator(g))] = v;
    return d;
  }

  // D_1 ... D_p . V with p = dim V
  Rational product(const std::vector<DivisorClass>& ds, const Cycle& v) const {
    if (static_cast<int>(ds.size()) != v.dim) throw Error(ErrorCode::WrongDimension, "product needs dim V divisors");
    Rational total = 0;
    const int g = static_cast<int>(gens_.size());
    std::vector<int> pick(ds.size(), 0);
    while (true) {
      Rational coef = 1;
      for (size_t k = 0; k < ds.size() && coef != 0; ++k) coef *= ds[k].c[static_cast<size_t>(pick[k])];
      if (coef != 0)
        for (const auto& [tc, tg] : v.terms) {
          std::vector<int> idx(pick);
          idx.insert(idx.end(), tg.begin(), tg.end());
          total += coef * tc * form(idx);
        }
      size_t k = 0;
      while (k < pick.size() && ++pick[k] == g) pick[k++] = 0;
      if (k == pick.size()) break;
    }
    return total;
  }

  // omega^a L^b . V
  Rational mixed(const DivisorClass& omega, int a, const DivisorClass& l, int b, const Cycle& v) const {
    std::vector<DivisorClass> ds(static_cast<size_t>(a), omega);
    ds.insert(ds.end(), static_cast<size_t>(b), l);
    return product(ds, v);
  }

  static IntersectionRing projective(int n) {
    IntersectionRing r(n, {"H"});
    r.set_name("P" + std::to_string(n));
    r.set_form(std::vector<int>(static_cast<size_t>(n), 0), 1);
    for (int k = 1; k < n; ++k) r.add_cycle({"P" + std::to_string(k), k, {{Rational(1), std::vector<int>(static_cast<size_t>(n - k), 0)}}});
    r.add_cycle({"point", 0, {{Rational(1), std::vector<int>(static_cast<size_t>(n), 0)}}});
    return r;
  }

  static IntersectionRing blp3() {
    IntersectionRing r(3, {"H", "E"});
    r.set_name("blp3");
    r.set_form({0, 0, 0}, 1);
    r.set_form({1, 1, 1}, 1);
    r.set_form({0, 0, 1}, 0);
    r.set_form({0, 1, 1}, 0);
    r.add_cycle({"E", 2, {{Rational(1), {1}}}});
    r.add_cycle({"plane", 2, {{Rational(1), {0}}}});
    r.add_cycle({"line", 1, {{Rational(1), {0, 0}}}});
    r.add_cycle({"line_in_E", 1, {{Rational(-1), {1, 1}}}});
    r.add_cycle({"point", 0, {{Rational(1), {0, 0, 0}}}});
    return r;
  }

  static IntersectionRing builtin(const std::string& name) {
    if (name == "blp3") return blp3();
    if (name.size() >= 2 && name[0] == 'P') {
      int n = 0;
      try {
        n = std::stoi(name.substr(1));
      } catch (...) {
        n = 0;
      }
      if (n >= 1 && n <= 6) return projective(n);
    }
    throw Error(ErrorCode::ParseError, "unknown builtin ring " + name);
  }

  // gens: H E / dim 3 / form H H H = 1 / cycle NAME dim P = c G.. + c G..
  static IntersectionRing parse(std::istream& in) {
    IntersectionRing r;
    std::string line;
    int lineno = 0;
    bool have_gens = false, have_dim = false;
    std::vector<std::pair<int, std::string>> deferred;
    auto fail = [&](const std::string& m) { throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": " + m); };
    while (std::getline(in, line)) {
      ++lineno;
      auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      std::istringstream ls(line);
      std::string key;
      if (!(ls >> key)) continue;
      if (key == "gens:") {
        std::string g;
        while (ls >> g) r.gens_.push_back(g);
        if (r.gens_.empty()) fail("no generators");
        have_gens = true;
      } else if (key == "dim") {
        if (!(ls >> r.dim_) || r.dim_ < 1) fail("bad dimension");
        have_dim = true;
      } else if (key == "form" || key == "cycle") {
        deferred.emplace_back(lineno, line);
      } else {
        fail("unknown keyword '" + key + "'");
      }
    }
    if (!have_gens || !have_dim) throw Error(ErrorCode::ParseError, "ring file needs 'gens:' and 'dim'");
    for (const auto& [ln, text] : deferred) {
      lineno = ln;
      try {
        std::istringstream ls(text);
        std::string key;
        ls >> key;
        auto eq = text.find('=');
        if (eq == std::string::npos) fail("missing '='");
        if (key == "form") {
          std::istringstream lhs(text.substr(0, eq));
          lhs >> key;
          std::vector<int> idx;
          std::string g;
          while (lhs >> g) idx.push_back(r.generator(g));
          std::istringstream rhs(text.substr(eq + 1));
          std::string v, extra;
          if (!(rhs >> v) || (rhs >> extra)) fail("form value must be one rational");
          r.set_form(idx, rational_from_decimal(v));
        } else {
          std::istringstream lhs(text.substr(0, eq));
          std::string name, dk;
          int p = -1;
          lhs >> key >> name >> dk >> p;
          if (name.empty() || dk != "dim" || p < 0) fail("expected 'cycle NAME dim P = ...'");
          Cycle c{name, p, {}};
          std::string rest = text.substr(eq + 1);
          std::istringstream terms(rest);
          std::string tok;
          std::vector<std::string> cur;
          auto flush = [&]() {
            if (cur.empty()) fail("empty cycle term");
            Rational coef = 1;
            size_t start = 0;
            if (cur[0].find_first_of("0123456789") == 0 || cur[0][0] == '-' || cur[0][0] == '+') {
              coef = rational_from_decimal(cur[0]);
              start = 1;
            }
            std::vector<int> gs;
            for (size_t k = start; k < cur.size(); ++k) gs.push_back(r.generator(cur[k]));
            c.terms.emplace_back(coef, gs);
            cur.clear();
          };
          while (terms >> tok) {
            if (tok == "+") flush();
            else cur.push_back(tok);
          }
          flush();
          r.add_cycle(c);
        }
      } catch (const Error& e) {
        if (std::string(e.what()).find("line ") != std::string::npos) throw;
        fail(e.what());
      }
    }
    r.validate();
    return r;
  }

  static IntersectionRing load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorCode::IoError, "cannot open ring file " + path);
    auto r = parse(f);
    r.set_name(path);
    return r;
  }

  void validate() const {
    for (const auto& [k, v] : form_)
      if (!std::is_sorted(k.begin(), k.end())) throw Error(ErrorCode::ParseError, "internal: unsorted form key");
  }

 private:
  int dim_ = 0;
  std::vector<std::string> gens_;
  std::map<std::vector<int>, Rational> form_;
  std::vector<Cycle> cycles_;
  std::string name_;
};

// ---- central charge paths ----

struct ChargePath {
  RationalPoly re, im;
  int dim = 0;
  CRational at(const Rational& t) const { return {re(t), im(t)}; }
  CRational at_one() const { return at(Rational(1)); }
  std::complex<double> eval(double t) const { return {re.eval(t), im.eval(t)}; }
  ChargePath scaled(const Rational& s) const { return {re * s, im * s, dim}; }
};

inline ChargePath charge_path(const IntersectionRing& ring, const Cycle& v, const DivisorClass& l,
                              const DivisorClass& omega) {
  const int p = v.dim;
  if (p > ring.dim()) throw Error(ErrorCode::WrongDimension, "cycle dimension exceeds the ring");
  if (!(ring.mixed(omega, p, l, 0, v) > 0))
    throw Error(ErrorCode::NonKaehler, "omega^p . " + v.name + " is not positive");
  std::vector<Rational> re(static_cast<size_t>(p) + 1), im(static_cast<size_t>(p) + 1);
  for (int k = 0; k <= p; ++k) {
    int m = p - k;
    Rational num = ring.mixed(omega, m, l, k, v) / (factorial(m) * factorial(k));
    CRational c = CRational::i_power(-m) * Rational(-num);  // -(-i)^m num
    re[static_cast<size_t>(m)] = c.re;
    im[static_cast<size_t>(m)] = c.im;
  }
  return {RationalPoly(re), RationalPoly(im), p};
}

// int_V (omega + i L)^p as an exact complex number
inline CRational complexified_volume(const IntersectionRing& ring, const Cycle& v, const DivisorClass& l,
                                     const DivisorClass& omega) {
  CRational s;
  for (int m = 0; m <= v.dim; ++m)
    s = s + CRational::i_power(m) * (binomial(v.dim, m) * ring.mixed(omega, v.dim - m, l, m, v));
  return s;
}

// ---- lifted angles ----

struct Crossing {
  RootInterval t;             // isolating interval of the first root in [1, inf)
  int roots_on_ray = 0;       // Sturm count of gcd(Re Z, Im Z) on [1, inf)
  RationalPoly common;        // gcd(Re Z, Im Z)
};

struct LiftedAngle {
  bool defined = false;
  double angle = 0.0;  // winding of Z from t = infinity to t = 1
  std::optional<Crossing> crossing;
  int steps = 0;
  double total_variation = 0.0;
};

namespace detail {

inline double principal(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

}  // namespace detail

inline std::optional<Crossing> origin_crossing(const ChargePath& z) {
  if (z.re.is_zero() && z.im.is_zero()) throw Error(ErrorCode::DimensionMismatch, "zero charge path");
  RationalPoly g = z.re.is_zero() ? z.im.monic() : z.im.is_zero() ? z.re.monic() : RationalPoly::gcd(z.re, z.im);
  if (g.degree() < 1) return std::nullopt;
  SturmSequence st(g);
  int n = st.count_from(Rational(1));
  if (n == 0) return std::nullopt;
  auto roots = isolate_roots_from(g, Rational(1), Rational(1, 1000000000));
  Crossing c{roots.front(), n, g};
  return c;
}

inline LiftedAngle lifted_angle(const ChargePath& z) {
  LiftedAngle out;
  out.crossing = origin_crossing(z);
  if (out.crossing) return out;
  // tau = 1/t: R(tau) = tau^d Z(1/tau), R(0) is the leading coefficient
  const int d = std::max(z.re.degree(), z.im.degree());
  RationalPoly rr = z.re.reversed(d), ri = z.im.reversed(d);
  auto arg = [&](double tau) { return std::atan2(ri.eval(tau), rr.eval(tau)); };
  double total = 0.0, tv = 0.0;
  int steps = 0;
  // adaptive: accept [a,b] when its rotation is small and halves agree
  std::vector<std::pair<double, double>> stack;
  const int n0 = 64;
  for (int k = n0 - 1; k >= 0; --k) stack.emplace_back(static_cast<double>(k) / n0, static_cast<double>(k + 1) / n0);
  while (!stack.empty()) {
    auto [a, b] = stack.back();
    stack.pop_back();
    double fa = arg(a), fb = arg(b), m = 0.5 * (a + b), fm = arg(m);
    double whole = detail::principal(fb - fa), split = detail::principal(fm - fa) + detail::principal(fb - fm);
    if ((std::abs(whole) > std::numbers::pi / 8 || std::abs(whole - split) > 1e-13) && b - a > 1e-12) {
      stack.emplace_back(m, b);
      stack.emplace_back(a, m);
      continue;
    }
    total += split;
    tv += std::abs(split);
    ++steps;
  }
  out.defined = true;
  out.angle = total;
  out.steps = steps;
  out.total_variation = tv;
  return out;
}

inline double slicing_angle(double theta_hat, int dim_v) { return theta_hat - std::numbers::pi / 2 * (dim_v - 2); }

inline double slicing_angle(const LiftedAngle& a, int dim_v) {
  if (!a.defined) throw Error(ErrorCode::AngleUndefined, "charge path passes through the origin");
  return slicing_angle(a.angle, dim_v);
}

// ---- Chern number inequalities ----

struct ChernCheck {
  Rational lhs, rhs;
  bool applicable = true;
  bool holds = false;
  Rational margin() const { return rhs - lhs; }
};

// (omega^3)(L^3/6) < 3 (L^2 omega / 2)(L omega^2)
inline ChernCheck chern_inequality_3d(const IntersectionRing& ring, const DivisorClass& l, const DivisorClass& omega) {
  if (ring.dim() != 3) throw Error(ErrorCode::WrongDimension, "Chern inequality is stated for threefolds");
  auto x = ring.fundamental();
  ChernCheck c;
  c.lhs = ring.mixed(omega, 3, l, 0, x) * (ring.mixed(omega, 0, l, 3, x) / 6);
  c.rhs = 3 * (ring.mixed(omega, 1, l, 2, x) / 2) * ring.mixed(omega, 2, l, 1, x);
  c.applicable = !l.is_zero();
  c.holds = c.applicable && c.lhs < c.rhs;
  return c;
}

struct Chern4Check {
  bool applicable = true;
  Rational ratio;  // (L^3 omega) / (L omega^3), must exceed 1
  Rational second; // must be negative
  bool first_holds = false, second_holds = false;
};

inline Chern4Check chern_inequalities_4d(const IntersectionRing& ring, const DivisorClass& l, const DivisorClass& omega) {
  if (ring.dim() != 4) throw Error(ErrorCode::WrongDimension, "four-dimensional inequalities need a fourfold");
  auto x = ring.fundamental();
  Rational l3w = ring.mixed(omega, 1, l, 3, x), lw3 = ring.mixed(omega, 3, l, 1, x);
  Rational w4 = ring.mixed(omega, 4, l, 0, x), l2w2 = ring.mixed(omega, 2, l, 2, x), l4 = ring.mixed(omega, 0, l, 4, x);
  Chern4Check c;
  if (lw3 == 0 || l3w == 0) {
    c.applicable = false;
    return c;
  }
  c.ratio = l3w / lw3;
  c.second = l3w * w4 / lw3 - 6 * l2w2 + lw3 * l4 / l3w;
  c.first_holds = c.ratio > 1;
  c.second_holds = c.second < 0;
  return c;
}

// ---- classification ----

enum class VerdictStatus { Candidate, ChernObstructed, AngleUndefined, HEmptyByCharge, PhaseObstructed };

inline std::string to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Candidate: return "Candidate";
    case VerdictStatus::ChernObstructed: return "ChernObstructed";
    case VerdictStatus::AngleUndefined: return "AngleUndefined";
    case VerdictStatus::HEmptyByCharge: return "HEmptyByCharge";
    case VerdictStatus::PhaseObstructed: return "PhaseObstructed";
  }
  return "?";
}

struct Margin {
  std::string check;    // chern | zx_im | zx_neg_re | zv_im | phase
  std::string subject;  // X or cycle name
  double value = 0.0;
  std::optional<Rational> exact;
  bool pass() const { return exact ? *exact > 0 : value > 0; }
};

struct StabilityVerdict {
  VerdictStatus status = VerdictStatus::Candidate;
  std::string subject;  // cycle responsible for the status
  std::optional<RootInterval> t_interval;
  std::vector<Margin> margins;
  std::map<std::string, LiftedAngle> angles;
  std::map<std::string, double> slicing;  // phi_V for defined angles
  std::map<std::string, CRational> charge;  // Z_V(1)
  ChernCheck chern;

  std::string label() const {
    return status == VerdictStatus::Candidate ? to_string(status) : to_string(status) + "(" + subject + ")";
  }
};

// Default cycle list: every positive-dimensional proper cycle of the ring (points have constant Z = -1).
inline std::vector<Cycle> classification_cycles(const IntersectionRing& ring) {
  std::vector<Cycle> out;
  for (const auto& c : ring.cycles())
    if (c.dim >= 1 && c.dim < ring.dim()) out.push_back(c);
  return out;
}

inline StabilityVerdict stability_classify(const IntersectionRing& ring, const DivisorClass& l, const DivisorClass& omega,
                                           const std::vector<Cycle>& cycles) {
  StabilityVerdict v;
  const auto x = ring.fundamental();
  // failures ranked: Chern, undefined angle, charge outside H, phase order
  std::optional<std::pair<int, std::pair<VerdictStatus, std::string>>> worst;
  auto fail = [&](int rank, VerdictStatus s, const std::string& who) {
    if (!worst || rank < worst->first) worst = {rank, {s, who}};
  };

  // (i)
  if (ring.dim() == 3) {
    v.chern = chern_inequality_3d(ring, l, omega);
    v.margins.push_back({"chern", "X", to_double(v.chern.margin()), v.chern.margin()});
    if (v.chern.applicable && !v.chern.holds) fail(0, VerdictStatus::ChernObstructed, "X");
  }

  std::vector<Cycle> all{x};
  all.insert(all.end(), cycles.begin(), cycles.end());
  for (const auto& c : all) {
    auto z = charge_path(ring, c, l, omega);
    v.charge[c.name] = z.at_one();
    v.angles[c.name] = lifted_angle(z);
    const auto& a = v.angles[c.name];
    if (a.defined) v.slicing[c.name] = slicing_angle(a, c.dim);
    else fail(1, VerdictStatus::AngleUndefined, c.name);
  }

  // (ii)
  const CRational zx = v.charge["X"];
  v.margins.push_back({"zx_im", "X", to_double(zx.im), zx.im});
  v.margins.push_back({"zx_neg_re", "X", to_double(Rational(-zx.re)), Rational(-zx.re)});
  if (!(zx.im > 0 && zx.re < 0)) fail(2, VerdictStatus::HEmptyByCharge, "X");

  // (iii)
  for (const auto& c : cycles) {
    const CRational z = v.charge[c.name];
    v.margins.push_back({"zv_im", c.name, to_double(z.im), z.im});
    if (!(z.im > 0)) fail(3, VerdictStatus::HEmptyByCharge, c.name);
  }

  // (iv)
  for (const auto& c : cycles) {
    if (!v.slicing.count("X") || !v.slicing.count(c.name)) continue;
    double d = v.slicing[c.name] - v.slicing["X"];
    v.margins.push_back({"phase", c.name, d, std::nullopt});
    if (!(d > 0)) fail(4, VerdictStatus::PhaseObstructed, c.name);
  }

  if (worst) {
    v.status = worst->second.first;
    v.subject = worst->second.second;
    if (v.status == VerdictStatus::AngleUndefined) v.t_interval = v.angles[v.subject].crossing->t;
  }
  return v;
}

inline StabilityVerdict stability_classify(const IntersectionRing& ring, const DivisorClass& l, const DivisorClass& omega) {
  return stability_classify(ring, l, omega, classification_cycles(ring));
}

// ---- model curves: E.(mu^* omega + i(mu^* alpha - delta E))^n ----

struct ResolutionData {
  enum class Kind { Point, Divisor, Trivial };
  Kind kind = Kind::Point;
  DivisorClass divisor;  // for Kind::Divisor
  int r = 1;             // for Kind::Trivial, ideal (t^r)
};

// coefficients c_j of delta^j
inline std::vector<CRational> e_product_polynomial(const IntersectionRing& ring, const ResolutionData& e,
                                                   const DivisorClass& l, const DivisorClass& omega) {
  const int n = ring.dim();
  const auto x = ring.fundamental();
  std::vector<CRational> c(static_cast<size_t>(n) + 1);
  // gamma = omega + i L; D^j gamma^{n-j} on X
  auto dgamma = [&](const DivisorClass* d, int j) {
    CRational s;
    for (int m = 0; m <= n - j; ++m) {
      std::vector<DivisorClass> ds(static_cast<size_t>(n - j - m), omega);
      ds.insert(ds.end(), static_cast<size_t>(m), l);
      if (d) ds.insert(ds.end(), static_cast<size_t>(j), *d);
      s = s + CRational::i_power(m) * (binomial(n - j, m) * ring.product(ds, x));
    }
    return s;
  };
  for (int j = 0; j <= n; ++j) {
    // C(n,j) (-i)^j E^{j+1} . gamma^{n-j}
    CRational ej;
    switch (e.kind) {
      case ResolutionData::Kind::Point:
        if (j == n) ej = {(n % 2) ? Rational(-1) : Rational(1), 0};
        break;
      case ResolutionData::Kind::Divisor:
        if (j >= 1) ej = dgamma(&e.divisor, j) * Rational(-1);
        break;
      case ResolutionData::Kind::Trivial:
        if (j == 0) ej = dgamma(nullptr, 0) * Rational(e.r);
        break;
    }
    c[static_cast<size_t>(j)] = CRational::i_power(-j) * ej * binomial(n, j);
  }
  return c;
}

inline CRational eval_delta_poly(const std::vector<CRational>& c, const Rational& delta) {
  CRational s;
  Rational p = 1;
  for (const auto& cj : c) {
    s = s + cj * p;
    p *= delta;
  }
  return s;
}

struct ModelCurveSlope {
  CRational leading;                       // delta^{n-p} C(n,n-p) i^{n-p} int_V (omega + i alpha)^p
  std::optional<std::vector<CRational>> e_poly;  // E.(...)^n in powers of delta
  std::optional<CRational> e_value;
  std::complex<double> slope;              // -(delta/pi) E.(...)^n, or from the leading term
  int codim = 0;
};

inline std::optional<ResolutionData> builtin_resolution(const IntersectionRing& ring, const Cycle& v) {
  if (v.dim == 0 && v.terms.size() == 1 && v.terms[0].first == 1 && ring.product({}, v) == 1)
    return ResolutionData{ResolutionData::Kind::Point, {}, 1};
  if (v.dim == ring.dim()) return ResolutionData{ResolutionData::Kind::Trivial, {}, 1};
  if (v.dim == ring.dim() - 1) {
    DivisorClass d{std::vector<Rational>(ring.generators().size())};
    for (const auto& [c, g] : v.terms) d.c[static_cast<size_t>(g[0])] += c;
    return ResolutionData{ResolutionData::Kind::Divisor, d, 1};
  }
  return std::nullopt;
}

inline ModelCurveSlope model_curve_slope_subvariety(const IntersectionRing& ring, const Cycle& v, const DivisorClass& l,
                                                    const DivisorClass& omega, const Rational& delta,
                                                    bool require_full = false) {
  const int n = ring.dim(), p = v.dim;
  ModelCurveSlope m;
  m.codim = n - p;
  Rational dp = 1;
  for (int k = 0; k < n - p; ++k) dp *= delta;
  m.leading = CRational::i_power(n - p) * complexified_volume(ring, v, l, omega) * (dp * binomial(n, n - p));
  auto res = builtin_resolution(ring, v);
  if (res) {
    m.e_poly = e_product_polynomial(ring, *res, l, omega);
    m.e_value = eval_delta_poly(*m.e_poly, delta);
    m.slope = -(to_double(delta) / std::numbers::pi) * m.e_value->value();
  } else {
    if (require_full) throw Error(ErrorCode::MissingResolutionData, "no resolution data for cycle " + v.name);
    m.slope = -(to_double(delta) / std::numbers::pi) * m.leading.value();
  }
  return m;
}

struct ObstructionMargins {
  double dhym = 0.0;     // Im(e^{-i theta} P) >= 0 when dHYM is solvable
  double h_real = 0.0;   // Re(e^{-i theta} P) >= 0 when H is nonempty
  double h_top = 0.0;    // -Im(e^{-i n pi/2} P) >= 0 when H is nonempty
  bool dhym_fires() const { return dhym < 0; }
  bool h_fires() const { return h_real < 0 || h_top < 0; }
};

// P = E.(mu^* omega + i(mu^* alpha - delta E))^n
inline ObstructionMargins obstruction_test(std::complex<double> p, double theta_hat, int n) {
  const auto rot = std::exp(std::complex<double>(0, -theta_hat)) * p;
  const auto top = std::exp(std::complex<double>(0, -n * std::numbers::pi / 2)) * p;
  return {rot.imag(), rot.real(), -top.imag()};
}

// Subvariety form: strict versions for int_V (omega + i alpha)^p, p < n.
inline ObstructionMargins obstruction_test_subvariety(const IntersectionRing& ring, const Cycle& v, const DivisorClass& l,
                                                      const DivisorClass& omega, double theta_hat) {
  const int n = ring.dim(), p = v.dim;
  auto w = complexified_volume(ring, v, l, omega).value();
  auto rot = std::exp(std::complex<double>(0, -(theta_hat - (n - p) * std::numbers::pi / 2))) * w;
  auto top = std::exp(std::complex<double>(0, -p * std::numbers::pi / 2)) * w;
  return {rot.imag(), rot.real(), -top.imag()};
}

}  // namespace dhym
