#pragma once

// Arithmetic expressions for closed-form potentials.
//
//   expr    := term { ("+" | "-") term }
//   term    := unary { ("*" | "/") unary }
//   unary   := ("+" | "-") unary | power
//   power   := primary [ "^" unary ]
//   primary := number | constant | variable | call | "(" expr ")"
//   call    := function "(" expr ")"
//   function:= "sin" | "cos" | "exp" | "log"
//   constant:= "pi" | "e"
//   variable:= "x1" | "x2" | "x3" | "x4"
//   number  := digits [ "." digits ] [ ("e" | "E") [sign] digits ]
//
// "^" is right associative and binds tighter than unary minus on its left: -x1^2 = -(x1^2).
// Trees differentiate symbolically, so Hessians of convex potentials are exact.

#include <array>
#include <cctype>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>

#include "dhym/error.hpp"

namespace dhym {

class Expr {
 public:
  enum class Op { Num, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Log };
  using Vars = std::array<double, 4>;

  static Expr parse(const std::string& text) {
    Parser p{text, 0};
    Expr e = p.expr();
    p.skip();
    if (p.pos != text.size()) p.fail("unexpected '" + std::string(1, text[p.pos]) + "'");
    return e;
  }

  static Expr num(double v) { return Expr(std::make_shared<Node>(Node{Op::Num, v, 0, nullptr, nullptr})); }
  static Expr var(int k) { return Expr(std::make_shared<Node>(Node{Op::Var, 0, k, nullptr, nullptr})); }

  double operator()(const Vars& x) const { return eval(*n_, x); }
  double operator()(double x1, double x2 = 0, double x3 = 0, double x4 = 0) const { return (*this)({x1, x2, x3, x4}); }

  Expr derivative(int k) const { return Expr(diff(n_, k)); }

  // highest variable index used, 0 if constant
  int arity() const { return arity(*n_); }

 private:
  struct Node {
    Op op;
    double v;
    int k;
    std::shared_ptr<const Node> a, b;
  };
  using P = std::shared_ptr<const Node>;

  explicit Expr(P n) : n_(std::move(n)) {}

  static P mk(Op op, P a, P b = nullptr) { return std::make_shared<Node>(Node{op, 0, 0, std::move(a), std::move(b)}); }
  static P cst(double v) { return std::make_shared<Node>(Node{Op::Num, v, 0, nullptr, nullptr}); }
  static bool is(const P& p, double v) { return p->op == Op::Num && p->v == v; }

  // light folding keeps derivative trees small
  static P add(P a, P b) { return is(a, 0) ? b : is(b, 0) ? a : mk(Op::Add, a, b); }
  static P sub(P a, P b) { return is(b, 0) ? a : is(a, 0) ? mk(Op::Neg, b) : mk(Op::Sub, a, b); }
  static P mul(P a, P b) {
    if (is(a, 0) || is(b, 0)) return cst(0);
    if (is(a, 1)) return b;
    if (is(b, 1)) return a;
    return mk(Op::Mul, a, b);
  }
  static P div(P a, P b) { return is(a, 0) ? cst(0) : is(b, 1) ? a : mk(Op::Div, a, b); }

  static double eval(const Node& n, const Vars& x) {
    switch (n.op) {
      case Op::Num: return n.v;
      case Op::Var: return x[static_cast<size_t>(n.k - 1)];
      case Op::Add: return eval(*n.a, x) + eval(*n.b, x);
      case Op::Sub: return eval(*n.a, x) - eval(*n.b, x);
      case Op::Mul: return eval(*n.a, x) * eval(*n.b, x);
      case Op::Div: return eval(*n.a, x) / eval(*n.b, x);
      case Op::Pow: return std::pow(eval(*n.a, x), eval(*n.b, x));
      case Op::Neg: return -eval(*n.a, x);
      case Op::Sin: return std::sin(eval(*n.a, x));
      case Op::Cos: return std::cos(eval(*n.a, x));
      case Op::Exp: return std::exp(eval(*n.a, x));
      case Op::Log: return std::log(eval(*n.a, x));
    }
    return 0;
  }

  static int arity(const Node& n) {
    int m = n.op == Op::Var ? n.k : 0;
    if (n.a) m = std::max(m, arity(*n.a));
    if (n.b) m = std::max(m, arity(*n.b));
    return m;
  }

  static bool constant(const Node& n) { return arity(n) == 0; }

  static P diff(const P& p, int k) {
    const Node& n = *p;
    switch (n.op) {
      case Op::Num: return cst(0);
      case Op::Var: return cst(n.k == k ? 1 : 0);
      case Op::Add: return add(diff(n.a, k), diff(n.b, k));
      case Op::Sub: return sub(diff(n.a, k), diff(n.b, k));
      case Op::Mul: return add(mul(diff(n.a, k), n.b), mul(n.a, diff(n.b, k)));
      case Op::Div: return div(sub(mul(diff(n.a, k), n.b), mul(n.a, diff(n.b, k))), mul(n.b, n.b));
      case Op::Neg: return is(diff(n.a, k), 0) ? cst(0) : mk(Op::Neg, diff(n.a, k));
      case Op::Sin: return mul(mk(Op::Cos, n.a), diff(n.a, k));
      case Op::Cos: return mul(mk(Op::Neg, mk(Op::Sin, n.a)), diff(n.a, k));
      case Op::Exp: return mul(p, diff(n.a, k));
      case Op::Log: return div(diff(n.a, k), n.a);
      case Op::Pow:
        if (constant(*n.b)) {
          // c u^(c-1) u'
          return mul(mul(n.b, mk(Op::Pow, n.a, sub(n.b, cst(1)))), diff(n.a, k));
        }
        // u^v (v' log u + v u'/u)
        return mul(p, add(mul(diff(n.b, k), mk(Op::Log, n.a)), div(mul(n.b, diff(n.a, k)), n.a)));
    }
    return cst(0);
  }

  struct Parser {
    const std::string& s;
    size_t pos;

    [[noreturn]] void fail(const std::string& m) const {
      throw Error(ErrorCode::ParseError, "expression '" + s + "' at column " + std::to_string(pos + 1) + ": " + m);
    }
    void skip() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
      skip();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }
    Expr expr() {
      P a = term().n_;
      for (;;) {
        if (eat('+')) a = mk(Op::Add, a, term().n_);
        else if (eat('-')) a = mk(Op::Sub, a, term().n_);
        else return Expr(a);
      }
    }
    Expr term() {
      P a = unary().n_;
      for (;;) {
        if (eat('*')) a = mk(Op::Mul, a, unary().n_);
        else if (eat('/')) a = mk(Op::Div, a, unary().n_);
        else return Expr(a);
      }
    }
    Expr unary() {
      if (eat('-')) return Expr(mk(Op::Neg, unary().n_));
      if (eat('+')) return unary();
      return power();
    }
    Expr power() {
      P a = primary().n_;
      if (eat('^')) return Expr(mk(Op::Pow, a, unary().n_));
      return Expr(a);
    }
    Expr primary() {
      skip();
      if (pos >= s.size()) fail("unexpected end");
      if (eat('(')) {
        Expr e = expr();
        if (!eat(')')) fail("expected ')'");
        return e;
      }
      const char c = s[pos];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
      if (std::isalpha(static_cast<unsigned char>(c))) {
        size_t b = pos;
        while (pos < s.size() && std::isalnum(static_cast<unsigned char>(s[pos]))) ++pos;
        std::string id = s.substr(b, pos - b);
        if (id == "pi") return Expr(cst(std::numbers::pi));
        if (id == "e") return Expr(cst(std::numbers::e));
        if (id.size() == 2 && id[0] == 'x' && id[1] >= '1' && id[1] <= '4') return var(id[1] - '0');
        Op f;
        if (id == "sin") f = Op::Sin;
        else if (id == "cos") f = Op::Cos;
        else if (id == "exp") f = Op::Exp;
        else if (id == "log") f = Op::Log;
        else {
          pos = b;
          fail("unknown name '" + id + "'");
        }
        if (!eat('(')) fail("expected '(' after " + id);
        Expr arg = expr();
        if (!eat(')')) fail("expected ')'");
        return Expr(mk(f, arg.n_));
      }
      fail("unexpected '" + std::string(1, c) + "'");
    }
    Expr number() {
      size_t b = pos;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
      if (pos < s.size() && s[pos] == '.') {
        ++pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
      }
      if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
        size_t q = pos + 1;
        if (q < s.size() && (s[q] == '+' || s[q] == '-')) ++q;
        if (q < s.size() && std::isdigit(static_cast<unsigned char>(s[q]))) {
          pos = q;
          while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        }
      }
      std::string t = s.substr(b, pos - b);
      if (t == ".") fail("bad number");
      return Expr(cst(std::stod(t)));
    }
  };

  P n_;
};

}  // namespace dhym
