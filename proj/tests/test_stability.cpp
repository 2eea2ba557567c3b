#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "dhym/stability.hpp"

using namespace dhym;

namespace {

struct Blp3 {
  IntersectionRing ring = IntersectionRing::blp3();
  DivisorClass omega = ring.divisor({{"H", 2}, {"E", -1}});
  DivisorClass line(const Rational& a, const Rational& b) const { return ring.divisor({{"H", a}, {"E", Rational(-b)}}); }
};

}  // namespace

TEST(RationalPoly, ArithmeticAndGcd) {
  RationalPoly p({-2, 0, 1}), q({1, 1});  // t^2 - 2, t + 1
  auto prod = p * q;
  EXPECT_EQ(prod.str(), "t^3 + t^2 - 2*t - 2");
  auto [quo, rem] = RationalPoly::divmod(prod, q);
  EXPECT_EQ(quo, p);
  EXPECT_TRUE(rem.is_zero());
  EXPECT_EQ(RationalPoly::gcd(prod, q * q), q);
  EXPECT_EQ((q * q * p).squarefree(), prod);
  EXPECT_EQ(rational_from_decimal("-0.125"), Rational(-1, 8));
  EXPECT_EQ(rational_from_decimal("3/6"), Rational(1, 2));
  EXPECT_EQ(rational_from_decimal("2.5e-1"), Rational(1, 4));
  EXPECT_THROW(rational_from_decimal("x1"), Error);
  EXPECT_EQ(rational_from_decimal("010"), 10);
  EXPECT_THROW(rational_from_decimal("1/0"), Error);
}

TEST(RationalPoly, SturmCountsAndIsolation) {
  // (t - 1)(t - 2)(t - 3)(t + 5)
  RationalPoly p = RationalPoly({-1, 1}) * RationalPoly({-2, 1}) * RationalPoly({-3, 1}) * RationalPoly({5, 1});
  SturmSequence st(p);
  EXPECT_EQ(st.count(Rational(0), Rational(10)), 3);
  EXPECT_EQ(st.count_from(Rational(1)), 3);
  EXPECT_EQ(st.count_from(Rational(3, 2)), 2);
  EXPECT_EQ(st.count_from(Rational(-100)), 4);
  auto r = isolate_roots_from(p, Rational(3, 2), Rational(1, 1000));
  ASSERT_EQ(r.size(), 2u);
  EXPECT_LE(r[0].lo, 2);
  EXPECT_GE(r[0].hi, 2);
  EXPECT_LE(r[1].lo, 3);
  EXPECT_GE(r[1].hi, 3);
  RationalPoly irr({-2, 0, 1});
  auto s = isolate_roots_from(irr, Rational(1), Rational(1, 1000000));
  ASSERT_EQ(s.size(), 1u);
  EXPECT_LT(to_double(s[0].lo), std::sqrt(2.0));
  EXPECT_GE(to_double(s[0].hi), std::sqrt(2.0));
  EXPECT_LE(s[0].hi - s[0].lo, Rational(1, 1000000));
}

TEST(Ring, Blp3Products) {
  Blp3 b;
  auto x = b.ring.fundamental();
  auto l = b.line(5, 3);
  EXPECT_EQ(b.ring.mixed(b.omega, 3, l, 0, x), 7);
  EXPECT_EQ(b.ring.mixed(b.omega, 0, l, 3, x), 125 - 27);
  EXPECT_EQ(b.ring.mixed(b.omega, 1, l, 2, x), 2 * 25 - 9);
  EXPECT_EQ(b.ring.mixed(b.omega, 2, l, 1, x), 4 * 5 - 3);
  const auto& lie = b.ring.cycle("line_in_E");
  EXPECT_EQ(b.ring.mixed(b.omega, 1, l, 0, lie), 1);
  EXPECT_EQ(b.ring.mixed(b.omega, 0, l, 1, lie), 3);
}

TEST(Ring, ParsesFilesAndReportsLines) {
  std::istringstream ok("# blow-up\ngens: H E\ndim 3\nform H H H = 1\nform E E E = 1\ncycle E dim 2 = E\n"
                        "cycle line_in_E dim 1 = -1 E E\ncycle mix dim 1 = 1 H H + -1 E E\n");
  auto r = IntersectionRing::parse(ok);
  EXPECT_EQ(r.dim(), 3);
  EXPECT_EQ(r.cycles().size(), 3u);
  EXPECT_EQ(r.form({1, 1, 1}), 1);
  EXPECT_EQ(r.form({0, 1, 0}), 0);
  auto omega = r.divisor({{"H", 2}, {"E", -1}});
  EXPECT_EQ(r.mixed(omega, 1, omega, 0, r.cycle("mix")), 3);

  std::istringstream bad("gens: H\ndim 2\nform H H = 1\nform H Q = 2\n");
  try {
    IntersectionRing::parse(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
  }
  std::istringstream asym("gens: H E\ndim 2\nform H E = 1\nform E H = 2\n");
  EXPECT_THROW(IntersectionRing::parse(asym), Error);
}

TEST(ChargePath, Blp3Formulas) {
  Blp3 b;
  for (auto [a, bb] : std::vector<std::pair<int, int>>{{5, 3}, {5, -2}, {3, 1}}) {
    auto l = b.line(a, bb);
    auto z = charge_path(b.ring, b.ring.fundamental(), l, b.omega);
    EXPECT_EQ(z.re, RationalPoly({Rational(-(a * a * a - bb * bb * bb), 6), 0, Rational(4 * a - bb, 2)}));
    EXPECT_EQ(z.im, RationalPoly({0, Rational(2 * a * a - bb * bb, 2), 0, Rational(-7, 6)}));
    auto ze = charge_path(b.ring, b.ring.cycle("E"), l, b.omega);
    EXPECT_EQ(ze.re, RationalPoly({Rational(-bb * bb, 2), 0, Rational(1, 2)}));
    EXPECT_EQ(ze.im, RationalPoly({0, bb}));
  }
  auto pt = charge_path(b.ring, b.ring.cycle("point"), b.line(5, 3), b.omega);
  EXPECT_EQ(pt.at_one(), (CRational{-1, 0}));
  EXPECT_THROW(charge_path(b.ring, b.ring.fundamental(), b.line(1, 0), b.line(1, 5)), Error);
}

TEST(LiftedAngle, PointAndCurves) {
  Blp3 b;
  auto l = b.line(5, 3);
  auto pt = lifted_angle(charge_path(b.ring, b.ring.cycle("point"), l, b.omega));
  ASSERT_TRUE(pt.defined);
  EXPECT_DOUBLE_EQ(pt.angle, 0.0);
  EXPECT_NEAR(slicing_angle(pt, 0), std::numbers::pi, 1e-15);
  // line: Z = -L.V + i t omega.V = -5 + 2 i t
  auto ln = lifted_angle(charge_path(b.ring, b.ring.cycle("line"), l, b.omega));
  EXPECT_NEAR(ln.angle, std::atan2(2.0, -5.0) - std::numbers::pi / 2, 1e-12);
}

TEST(LiftedAngle, InvariantUnderPositiveScaling) {
  Blp3 b;
  auto z = charge_path(b.ring, b.ring.fundamental(), b.line(5, 3), b.omega);
  auto a = lifted_angle(z), c = lifted_angle(z.scaled(Rational(37, 5)));
  EXPECT_NEAR(a.angle, c.angle, 1e-12);
  // finer uniform reconstruction agrees
  const int d = 3;
  auto rr = z.re.reversed(d), ri = z.im.reversed(d);
  double prev = std::atan2(ri.eval(0), rr.eval(0)), total = 0;
  for (int k = 1; k <= 200000; ++k) {
    double tau = k / 200000.0, cur = std::atan2(ri.eval(tau), rr.eval(tau));
    total += std::remainder(cur - prev, 2 * std::numbers::pi);
    prev = cur;
  }
  EXPECT_NEAR(total, a.angle, 1e-9);
  EXPECT_GE(a.total_variation, std::abs(a.angle) - 1e-12);
}

TEST(LiftedAngle, DetectsCrossingExactly) {
  // Z = (t - 2)(t + 1) + i (t - 2): passes through the origin at t = 2
  ChargePath z{RationalPoly({-2, -1, 1}), RationalPoly({-2, 1}), 2};
  auto a = lifted_angle(z);
  ASSERT_FALSE(a.defined);
  EXPECT_EQ(a.crossing->roots_on_ray, 1);
  EXPECT_LE(a.crossing->t.lo, 2);
  EXPECT_GE(a.crossing->t.hi, 2);
  EXPECT_THROW(slicing_angle(a, 2), Error);
  // root below t = 1 does not count
  ChargePath w{RationalPoly({Rational(-1, 2), 1}), RationalPoly({Rational(-1, 2), 1}), 1};
  EXPECT_TRUE(lifted_angle(w).defined);
}

TEST(LiftedAngle, SurfaceClassesAlwaysDefined) {
  // on P^1 x P^1 style surfaces omega ample keeps Im Z_X = t omega.L - ... never vanishing with Re
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> u(-20, 20), pos(1, 20);
  IntersectionRing r(2, {"A", "B"});
  r.set_form({0, 0}, 0);
  r.set_form({1, 1}, 0);
  r.set_form({0, 1}, 1);
  for (int k = 0; k < 500; ++k) {
    auto omega = r.divisor({{"A", pos(rng)}, {"B", pos(rng)}});
    auto l = r.divisor({{"A", u(rng)}, {"B", u(rng)}});
    auto z = charge_path(r, r.fundamental(), l, omega);
    // Z = t^2 w^2/2 - L^2/2 - i t w.L ; a crossing would need w.L = 0 and t^2 = L^2/w^2 >= 1
    auto wl = r.mixed(omega, 1, l, 1, r.fundamental());
    auto a = lifted_angle(z);
    if (wl != 0) EXPECT_TRUE(a.defined);
  }
}

TEST(Chern, ExactValues) {
  Blp3 b;
  auto c = chern_inequality_3d(b.ring, b.line(5, 3), b.omega);
  EXPECT_EQ(to_string(c.lhs), "343/3");
  EXPECT_EQ(to_string(c.rhs), "2091/2");
  EXPECT_TRUE(c.holds);
  auto z = chern_inequality_3d(b.ring, b.line(0, 0), b.omega);
  EXPECT_FALSE(z.applicable);
  EXPECT_THROW(chern_inequality_3d(IntersectionRing::projective(2), b.line(1, 1), b.omega), Error);
}

TEST(Chern, FourDimensional) {
  auto p4 = IntersectionRing::projective(4);
  auto omega = p4.divisor({{"H", 1}});
  // L = a H: ratio a^2, second = a^2 - 6 a^2 + a^2 = -4a^2 < 0
  auto c = chern_inequalities_4d(p4, p4.divisor({{"H", 3}}), omega);
  EXPECT_EQ(c.ratio, 9);
  EXPECT_EQ(c.second, -36);
  EXPECT_TRUE(c.first_holds && c.second_holds);
  auto d = chern_inequalities_4d(p4, p4.divisor({{"H", Rational(1, 2)}}), omega);
  EXPECT_FALSE(d.first_holds);
}

TEST(Classify, Blp3Regimes) {
  Blp3 b;
  auto v = stability_classify(b.ring, b.line(5, 3), b.omega);
  EXPECT_EQ(v.status, VerdictStatus::Candidate) << v.label();
  EXPECT_NEAR(v.slicing["X"], 1.956, 5e-4);
  EXPECT_NEAR(v.slicing["E"], 2.498, 5e-4);
  for (const auto& m : v.margins) EXPECT_TRUE(m.pass()) << m.check << " " << m.subject;

  auto h = stability_classify(b.ring, b.line(5, -2), b.omega);
  EXPECT_EQ(h.label(), "HEmptyByCharge(E)");
  EXPECT_EQ(h.charge["E"], (CRational{Rational(-3, 2), -2}));

  auto ph = stability_classify(b.ring, b.line(5, 1), b.omega);
  EXPECT_EQ(ph.label(), "PhaseObstructed(E)");
  EXPECT_NEAR(ph.slicing["E"], std::numbers::pi / 2, 1e-12);
  EXPECT_NEAR(ph.slicing["X"], 2.01715, 5e-5);
}

TEST(Classify, NoOriginCrossingForNegativeB) {
  // b = -3: Im Z_X < 0 on [1, inf) for small a and the other cycles keep Im != 0
  Blp3 b;
  int crossings = 0;
  for (int k = 1; k <= 200; ++k) {
    Rational a(k, 100);
    auto l = b.line(a, -3);
    for (const auto& c : classification_cycles(b.ring)) {
      auto z = charge_path(b.ring, c, l, b.omega);
      if (origin_crossing(z)) ++crossings;
    }
    if (origin_crossing(charge_path(b.ring, b.ring.fundamental(), l, b.omega))) ++crossings;
  }
  EXPECT_EQ(crossings, 0);
}

TEST(Classify, RandomSweepIsConsistent) {
  Blp3 b;
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> num(-40, 40);
  for (int k = 0; k < 200; ++k) {
    auto l = b.line(Rational(num(rng), 4), Rational(num(rng), 4));
    auto v = stability_classify(b.ring, l, b.omega);
    bool all_pass = std::all_of(v.margins.begin(), v.margins.end(), [](const Margin& m) { return m.pass(); });
    bool defined = std::all_of(v.angles.begin(), v.angles.end(), [](const auto& kv) { return kv.second.defined; });
    if (v.status == VerdictStatus::Candidate) EXPECT_TRUE(all_pass && defined);
    else EXPECT_TRUE(!all_pass || !defined);
  }
}

TEST(ModelCurve, PointOnCurveLeadingTerm) {
  auto p1 = IntersectionRing::projective(1);
  auto omega = p1.divisor({{"H", 1}}), l = p1.divisor({{"H", 2}});
  Rational delta(1, 20);
  auto m = model_curve_slope_subvariety(p1, p1.cycle("point"), l, omega, delta);
  EXPECT_EQ(m.leading, (CRational{0, delta}));
  ASSERT_TRUE(m.e_value);
  EXPECT_EQ(*m.e_value, m.leading);
  EXPECT_NEAR(m.slope.imag(), -to_double(delta * delta) / std::numbers::pi, 1e-15);
  EXPECT_NEAR(m.slope.real(), 0.0, 1e-15);
}

TEST(ModelCurve, DivisorLeadingOrderAgrees) {
  Blp3 b;
  auto l = b.line(5, 3);
  for (const char* name : {"E", "plane"}) {
    const auto& v = b.ring.cycle(name);
    Rational d1(1, 1000), d2(1, 2000);
    auto m1 = model_curve_slope_subvariety(b.ring, v, l, b.omega, d1, true);
    auto m2 = model_curve_slope_subvariety(b.ring, v, l, b.omega, d2, true);
    // E.(...)^n = leading + O(delta^2): the relative gap halves with delta
    auto gap = [](const ModelCurveSlope& m) { return std::abs((m.e_value->value() - m.leading.value())) / std::abs(m.leading.value()); };
    EXPECT_LT(gap(m1), 1e-2);
    EXPECT_NEAR(gap(m2) / gap(m1), 0.5, 1e-2);
    EXPECT_EQ((*m1.e_poly)[0], (CRational{}));
  }
  EXPECT_THROW(model_curve_slope_subvariety(b.ring, b.ring.cycle("line"), l, b.omega, Rational(1, 10), true), Error);
}

TEST(ModelCurve, TrivialIdealHasNoObstruction) {
  Blp3 b;
  auto l = b.line(5, 3);
  auto theta = lifted_angle(charge_path(b.ring, b.ring.fundamental(), l, b.omega)).angle;
  auto e = e_product_polynomial(b.ring, {ResolutionData::Kind::Trivial, {}, 2}, l, b.omega);
  auto p = eval_delta_poly(e, Rational(1, 10)).value();
  auto m = obstruction_test(p, theta, 3);
  EXPECT_NEAR(m.dhym, 0.0, 1e-9 * std::abs(p));
}

TEST(ModelCurve, SubvarietyObstructionMatchesClassifier) {
  Blp3 b;
  auto l = b.line(5, -2);
  auto theta = lifted_angle(charge_path(b.ring, b.ring.fundamental(), l, b.omega)).angle;
  EXPECT_EQ(complexified_volume(b.ring, b.ring.cycle("E"), l, b.omega), (CRational{-3, -4}));
  auto m = obstruction_test_subvariety(b.ring, b.ring.cycle("E"), l, b.omega, theta);
  EXPECT_TRUE(m.h_fires());
  auto ok = obstruction_test_subvariety(b.ring, b.ring.cycle("E"), b.line(5, 3), b.omega,
                                        lifted_angle(charge_path(b.ring, b.ring.fundamental(), b.line(5, 3), b.omega)).angle);
  EXPECT_FALSE(ok.h_fires());
  EXPECT_FALSE(ok.dhym_fires());
}
