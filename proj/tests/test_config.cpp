#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "dhym/config.hpp"
#include "dhym/expr.hpp"

using namespace dhym;

namespace {

Config parse(const std::string& text) {
  std::istringstream in(text);
  return Config::parse(in, "t.cfg");
}

std::string parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    return e.what();
  }
  return "";
}

std::string expr_error(const std::string& text) {
  try {
    Expr::parse(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, SectionsKeysAndComments) {
  auto c = parse("# header\n[fiber]\nn = 2   # trailing\ngrid=16\n\n[dhym]\nalpha = 2, 3\nnewton = yes\nname = a b\n");
  EXPECT_EQ(c.integer("fiber", "n", 0), 2);
  EXPECT_EQ(c.integer("fiber", "grid", 0), 16);
  EXPECT_EQ(c.integer("fiber", "missing", 7), 7);
  EXPECT_EQ(c.nums("dhym", "alpha"), (std::vector<double>{2, 3}));
  EXPECT_TRUE(c.flag("dhym", "newton", false));
  EXPECT_EQ(c.str("dhym", "name"), "a b");
  EXPECT_EQ(c.value("dhym", "alpha").line, 7);
  EXPECT_FALSE(c.has("dhym", "grid"));
  EXPECT_TRUE(c.has_section("fiber"));
}

TEST(Config, ErrorsCarryLineNumbers) {
  EXPECT_NE(parse_error("[a]\nx = 1\nx = 2\n").find("t.cfg: line 3: duplicate key 'x'"), std::string::npos);
  EXPECT_NE(parse_error("[a\n").find("line 1: unterminated section header"), std::string::npos);
  EXPECT_NE(parse_error("[a]\n\njust text\n").find("line 3: expected key = value"), std::string::npos);
  EXPECT_NE(parse_error("[]\n").find("bad section name"), std::string::npos);
  EXPECT_NE(parse_error("[a]\nbad key = 1\n").find("bad key"), std::string::npos);
}

TEST(Config, TypedAccessorsReject) {
  auto c = parse("[a]\nn = 2.5\nx = 1e\nb = maybe\nl = 1,,2\n");
  EXPECT_THROW(c.integer("a", "n", 0), Error);
  EXPECT_THROW(c.num("a", "x"), Error);
  EXPECT_THROW(c.flag("a", "b", false), Error);
  EXPECT_THROW(c.num("a", "missing"), Error);
  try {
    c.num("a", "x");
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  EXPECT_DOUBLE_EQ(c.num("a", "n"), 2.5);
}

TEST(Expr, Precedence) {
  EXPECT_DOUBLE_EQ(Expr::parse("1 + 2 * 3")(0), 7);
  EXPECT_DOUBLE_EQ(Expr::parse("(1 + 2) * 3")(0), 9);
  EXPECT_DOUBLE_EQ(Expr::parse("8 / 4 / 2")(0), 1);
  EXPECT_DOUBLE_EQ(Expr::parse("7 - 2 - 1")(0), 4);
  EXPECT_DOUBLE_EQ(Expr::parse("2 ^ 3 ^ 2")(0), 512);
  EXPECT_DOUBLE_EQ(Expr::parse("-x1^2")(3), -9);
  EXPECT_DOUBLE_EQ(Expr::parse("2^-1")(0), 0.5);
  EXPECT_DOUBLE_EQ(Expr::parse("--x1")(3), 3);
  EXPECT_DOUBLE_EQ(Expr::parse("1.5e2 + .5 + 2E-1")(0), 150.7);
}

TEST(Expr, NamesAndVariables) {
  EXPECT_DOUBLE_EQ(Expr::parse("pi")(0), std::numbers::pi);
  EXPECT_DOUBLE_EQ(Expr::parse("e")(0), std::numbers::e);
  EXPECT_DOUBLE_EQ(Expr::parse("x1 + 10*x2 + 100*x3 + 1000*x4")(1, 2, 3, 4), 4321);
  EXPECT_NEAR(Expr::parse("sin(pi/6) + cos(0) + exp(log(2))")(0), 3.5, 1e-15);
  EXPECT_EQ(Expr::parse("3").arity(), 0);
  EXPECT_EQ(Expr::parse("x1 * x3").arity(), 3);
}

TEST(Expr, ErrorsCarryColumns) {
  EXPECT_NE(expr_error("1 +").find("column 4: unexpected end"), std::string::npos);
  EXPECT_NE(expr_error("log(1 + x1").find("expected ')'"), std::string::npos);
  EXPECT_NE(expr_error("tan(x1)").find("column 1: unknown name 'tan'"), std::string::npos);
  EXPECT_NE(expr_error("x5").find("unknown name 'x5'"), std::string::npos);
  EXPECT_NE(expr_error("2 3").find("column 3: unexpected '3'"), std::string::npos);
  EXPECT_NE(expr_error("sin x1").find("expected '('"), std::string::npos);
  EXPECT_NE(expr_error(".").find("bad number"), std::string::npos);
}

TEST(Expr, SymbolicDerivatives) {
  auto f = Expr::parse("log(1 + exp(2*x1) + exp(2*x2)) + x1^3 * sin(x2) + x1^x2 / x2");
  const double x = 0.7, y = 1.3, h = 1e-5;
  for (int k = 1; k <= 2; ++k) {
    auto d = f.derivative(k);
    const double fd = k == 1 ? (f(x + h, y) - f(x - h, y)) / (2 * h) : (f(x, y + h) - f(x, y - h)) / (2 * h);
    EXPECT_NEAR(d(x, y), fd, 1e-8);
  }
  auto fxx = f.derivative(1).derivative(1);
  const double e2 = std::exp(2 * x), e2y = std::exp(2 * y), den = 1 + e2 + e2y;
  const double exact = 4 * e2 * (1 + e2y) / (den * den) + 6 * x * std::sin(y) + y * (y - 1) * std::pow(x, y - 2) / y;
  EXPECT_NEAR(fxx(x, y), exact, 1e-12);
  EXPECT_DOUBLE_EQ(Expr::parse("5").derivative(1)(0.3), 0);
  EXPECT_DOUBLE_EQ(Expr::parse("cos(x1)").derivative(1)(0.4), -std::sin(0.4));
}
