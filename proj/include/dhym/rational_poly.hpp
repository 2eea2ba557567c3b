#pragma once

// Univariate polynomials over Q with Sturm sequences and rational root isolation.

#include <algorithm>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "dhym/error.hpp"

namespace dhym {

using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend, boost::multiprecision::et_off>;

inline std::string to_string(const Rational& q) {
  std::ostringstream os;
  os << q;
  return os.str();
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

inline Rational rational_from_decimal(const std::string& s) {
  // accepts integers, p/q and plain decimals such as -0.125 or 1e-3
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    Rational num = rational_from_decimal(s.substr(0, slash)), den = rational_from_decimal(s.substr(slash + 1));
    if (den == 0) throw Error(ErrorCode::ParseError, "zero denominator: " + s);
    return num / den;
  }
  std::string mant = s;
  long exp10 = 0;
  auto e = s.find_first_of("eE");
  if (e != std::string::npos) {
    mant = s.substr(0, e);
    exp10 = std::stol(s.substr(e + 1));
  }
  bool neg = !mant.empty() && mant[0] == '-';
  if (!mant.empty() && (mant[0] == '-' || mant[0] == '+')) mant = mant.substr(1);
  auto dot = mant.find('.');
  std::string digits = mant;
  if (dot != std::string::npos) {
    digits = mant.substr(0, dot) + mant.substr(dot + 1);
    exp10 -= static_cast<long>(mant.size() - dot - 1);
  }
  if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
    throw Error(ErrorCode::ParseError, "not a rational number: " + s);
  digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size() - 1));  // no octal
  Rational q{boost::multiprecision::cpp_int(digits)};
  Rational ten = 10;
  for (long k = 0; k < std::abs(exp10); ++k) q = exp10 > 0 ? q * ten : q / ten;
  return neg ? Rational(-q) : q;
}

class RationalPoly {
 public:
  RationalPoly() = default;
  explicit RationalPoly(std::vector<Rational> c) : c_(std::move(c)) { trim(); }
  static RationalPoly constant(const Rational& a) { return RationalPoly({a}); }
  static RationalPoly monomial(const Rational& a, int k) {
    std::vector<Rational> c(static_cast<size_t>(k) + 1);
    c.back() = a;
    return RationalPoly(std::move(c));
  }

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  Rational operator[](int k) const { return k >= 0 && k <= degree() ? c_[static_cast<size_t>(k)] : Rational(0); }
  const Rational& leading() const { return c_.back(); }
  const std::vector<Rational>& coefficients() const { return c_; }

  Rational operator()(const Rational& x) const {
    Rational r = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * x + *it;
    return r;
  }
  double eval(double x) const {
    double r = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * x + to_double(*it);
    return r;
  }
  int sign_at(const Rational& x) const {
    Rational v = (*this)(x);
    return v > 0 ? 1 : v < 0 ? -1 : 0;
  }
  int sign_at_infinity() const { return is_zero() ? 0 : (leading() > 0 ? 1 : -1); }

  RationalPoly derivative() const {
    std::vector<Rational> d;
    for (int k = 1; k <= degree(); ++k) d.push_back(c_[static_cast<size_t>(k)] * k);
    return RationalPoly(std::move(d));
  }
  // t^m p(1/t)
  RationalPoly reversed(int m) const {
    std::vector<Rational> r(static_cast<size_t>(m) + 1);
    for (int k = 0; k <= degree(); ++k) r[static_cast<size_t>(m - k)] = c_[static_cast<size_t>(k)];
    return RationalPoly(std::move(r));
  }

  friend RationalPoly operator+(const RationalPoly& a, const RationalPoly& b) {
    std::vector<Rational> c(static_cast<size_t>(std::max(a.degree(), b.degree()) + 1));
    for (int k = 0; k < static_cast<int>(c.size()); ++k) c[static_cast<size_t>(k)] = a[k] + b[k];
    return RationalPoly(std::move(c));
  }
  friend RationalPoly operator-(const RationalPoly& a) { return a * Rational(-1); }
  friend RationalPoly operator-(const RationalPoly& a, const RationalPoly& b) { return a + (-b); }
  friend RationalPoly operator*(const RationalPoly& a, const Rational& s) {
    std::vector<Rational> c(a.c_);
    for (auto& x : c) x *= s;
    return RationalPoly(std::move(c));
  }
  friend RationalPoly operator*(const RationalPoly& a, const RationalPoly& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<Rational> c(static_cast<size_t>(a.degree() + b.degree() + 1));
    for (int i = 0; i <= a.degree(); ++i)
      for (int j = 0; j <= b.degree(); ++j) c[static_cast<size_t>(i + j)] += a.c_[static_cast<size_t>(i)] * b.c_[static_cast<size_t>(j)];
    return RationalPoly(std::move(c));
  }
  friend bool operator==(const RationalPoly& a, const RationalPoly& b) { return a.c_ == b.c_; }

  // quotient and remainder
  static std::pair<RationalPoly, RationalPoly> divmod(const RationalPoly& a, const RationalPoly& b) {
    if (b.is_zero()) throw Error(ErrorCode::DimensionMismatch, "polynomial division by zero");
    std::vector<Rational> r(a.c_), q(static_cast<size_t>(std::max(0, a.degree() - b.degree() + 1)));
    for (int k = a.degree() - b.degree(); k >= 0; --k) {
      Rational f = r[static_cast<size_t>(k + b.degree())] / b.leading();
      q[static_cast<size_t>(k)] = f;
      for (int j = 0; j <= b.degree(); ++j) r[static_cast<size_t>(k + j)] -= f * b.c_[static_cast<size_t>(j)];
    }
    RationalPoly rem(std::move(r));
    return {RationalPoly(std::move(q)), rem};
  }

  RationalPoly monic() const { return is_zero() ? *this : *this * (Rational(1) / leading()); }

  static RationalPoly gcd(RationalPoly a, RationalPoly b) {
    while (!b.is_zero()) {
      auto r = divmod(a, b).second;
      a = std::move(b);
      b = std::move(r);
    }
    return a.monic();
  }

  RationalPoly squarefree() const {
    if (degree() < 1) return *this;
    return divmod(*this, gcd(*this, derivative())).first.monic();
  }

  // |roots| < bound (Cauchy)
  Rational root_bound() const {
    Rational m = 0;
    for (int k = 0; k < degree(); ++k) m = std::max(m, Rational(abs(c_[static_cast<size_t>(k)] / leading())));
    return m + 1;
  }

  std::string str(const std::string& var = "t") const {
    if (is_zero()) return "0";
    std::string s;
    for (int k = degree(); k >= 0; --k) {
      const Rational& a = c_[static_cast<size_t>(k)];
      if (a == 0) continue;
      if (!s.empty()) s += a > 0 ? " + " : " - ";
      else if (a < 0) s += "-";
      Rational m = abs(a);
      if (m != 1 || k == 0) s += to_string(m);
      if (k >= 1) s += (m != 1 ? "*" : "") + var;
      if (k >= 2) s += "^" + std::to_string(k);
    }
    return s;
  }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
  }
  std::vector<Rational> c_;
};

// Sturm chain of the squarefree part; counts distinct real roots exactly.
class SturmSequence {
 public:
  explicit SturmSequence(const RationalPoly& p) {
    if (p.is_zero()) throw Error(ErrorCode::DimensionMismatch, "Sturm sequence of the zero polynomial");
    base_ = p.squarefree();
    chain_.push_back(base_);
    if (base_.degree() >= 1) {
      chain_.push_back(base_.derivative());
      while (chain_.back().degree() >= 1) {
        auto r = RationalPoly::divmod(chain_[chain_.size() - 2], chain_.back()).second;
        if (r.is_zero()) break;
        chain_.push_back(-r);
      }
    }
  }

  const RationalPoly& squarefree_part() const { return base_; }
  const std::vector<RationalPoly>& chain() const { return chain_; }

  int variations(const Rational& x) const {
    int v = 0, last = 0;
    for (const auto& q : chain_) {
      int s = q.sign_at(x);
      if (s == 0) continue;
      if (last != 0 && s != last) ++v;
      last = s;
    }
    return v;
  }
  int variations_at_infinity() const {
    int v = 0, last = 0;
    for (const auto& q : chain_) {
      int s = q.sign_at_infinity();
      if (s == 0) continue;
      if (last != 0 && s != last) ++v;
      last = s;
    }
    return v;
  }

  // distinct roots in (a, b]
  int count(const Rational& a, const Rational& b) const { return variations(a) - variations(b); }
  // distinct roots in [a, infinity)
  int count_from(const Rational& a) const {
    return (base_.sign_at(a) == 0 ? 1 : 0) + variations(a) - variations_at_infinity();
  }

 private:
  RationalPoly base_;
  std::vector<RationalPoly> chain_;
};

struct RootInterval {
  Rational lo, hi;  // root in (lo, hi], or exactly lo == hi
  bool exact = false;
};

// Isolates every distinct root in [a, infinity) to width <= tol, ascending.
inline std::vector<RootInterval> isolate_roots_from(const RationalPoly& p, const Rational& a, const Rational& tol) {
  SturmSequence st(p);
  const auto& f = st.squarefree_part();
  std::vector<RootInterval> out;
  if (f.degree() < 1) return out;
  if (f.sign_at(a) == 0) out.push_back({a, a, true});
  Rational hi = std::max(f.root_bound(), Rational(a + 1));
  std::vector<std::pair<Rational, Rational>> stack{{a, hi}};
  std::vector<RootInterval> found;
  while (!stack.empty()) {
    auto [lo, up] = stack.back();
    stack.pop_back();
    int n = st.count(lo, up);
    if (n == 0) continue;
    if (n == 1 && up - lo <= tol) {
      found.push_back({lo, up, f.sign_at(up) == 0});
      if (found.back().exact) found.back().lo = up;
      continue;
    }
    Rational mid = (lo + up) / 2;
    stack.push_back({mid, up});
    stack.push_back({lo, mid});
  }
  std::sort(found.begin(), found.end(), [](const auto& x, const auto& y) { return x.lo < y.lo; });
  out.insert(out.end(), found.begin(), found.end());
  return out;
}

}  // namespace dhym
