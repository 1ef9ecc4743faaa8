#include <cmath>
#include <map>
#include <string>

#include <gtest/gtest.h>

#include "hybrid/expr.hpp"

using hybrid::Vector;
using hybrid::expr::Context;
using hybrid::expr::DiagnosticError;
using hybrid::expr::Expression;
using hybrid::expr::Type;

namespace {

const std::map<std::string, double> kParams{{"gain", 0.3}, {"r", 0.5}};

Context ctx3() {
  Context c;
  c.x_dim = 3;
  c.params = &kParams;
  return c;
}

Vector point() {
  Vector x(3);
  x << 0.5, -2.0, 3.0;
  return x;
}

struct Golden {
  const char* text;
  double expected;
  /// Exact comparison for rational arithmetic, 1e-12 otherwise.
  bool exact;
};

// Expected values are worked out by hand at x = (0.5, -2, 3), gain = 0.3, r = 0.5.
const Golden kReal[] = {
    {"1 + 2 * 3", 7.0, true},
    {"(1 + 2) * 3", 9.0, true},
    {"x0 + x1 + x2", 1.5, true},
    {"x0 * x1 * x2", -3.0, true},
    {"x2 / x1", -1.5, true},
    {"x1 - x2 - x0", -5.5, true},
    {"x1 - (x2 - x0)", -4.5, true},
    {"-x1", 2.0, true},
    {"--x1", -2.0, true},
    {"-x1 ^ 2", -4.0, true},
    {"(-x1) ^ 2", 4.0, true},
    {"2 ^ 3 ^ 2", 512.0, true},
    {"(2 ^ 3) ^ 2", 64.0, true},
    {"x2 ^ -1", 1.0 / 3.0, false},
    {"pow(x1, 3)", -8.0, true},
    {"pow(4, 0.5)", 2.0, true},
    {"1 / 4 + 1 / 8", 0.375, true},
    {"x0 / 4", 0.125, true},
    {"abs(x1)", 2.0, true},
    {"sign(x1) + sign(x2) + sign(0)", 0.0, true},
    {"min(x0, x1, x2)", -2.0, true},
    {"max(x0, x1, x2)", 3.0, true},
    {"min(1, 2) + max(-1, -2)", 0.0, true},
    {"piecewise(x0 >= 1, 1 - x1, x1)", -2.0, true},
    {"piecewise(x2 >= 1, 1 - x1, x1)", 3.0, true},
    {"piecewise(x0 < 1 and x1 < 0, 10, 20)", 10.0, true},
    {"piecewise(not (x0 < 1) or x2 = 3, 10, 20)", 10.0, true},
    {"pow(-1, 1 - 0)", -1.0, true},
    {"gain * (x2 - x0)", 0.3 * 2.5, true},
    {"-r * x1", 1.0, true},
    {"1e-3 * 1000", 1.0, true},
    {".5 + 0.25", 0.75, true},
    {"2.5e1 / 5", 5.0, true},
    {"x0 * 2 - 1", 0.0, true},
    {"(x0 + x1) * (x0 - x1)", 0.25 - 4.0, true},
    {"sqrt(x2 * 3)", 3.0, true},
    {"sqrt(2)", 1.4142135623730951, false},
    {"exp(1)", 2.718281828459045, false},
    {"log(x2)", 1.0986122886681098, false},
    {"exp(log(7))", 7.0, false},
    {"log(exp(-x1))", 2.0, false},
    {"pow(x2, 0.25)", 1.3160740129524924, false},
    {"pow(1 - 2 * log(x0), -0.5)", 0.6473482711774282, false},
    {"pi", 3.141592653589793, false},
    {"sqrt(x0) * sqrt(x0)", 0.5, false},
    {"exp(-x0) + exp(x0)", 2.2552519304127614, false},
};

struct GoldenBool {
  const char* text;
  bool expected;
};

const GoldenBool kBool[] = {
    {"x0 < x2 and x1 <= -2", true},
    {"x1 > 0 or x2 >= 4", false},
    {"not x0 = 0.5", false},
    {"x0 * x1 = -1 && !(x2 < 0) || false", true},
};

}  // namespace

TEST(ExprGolden, RealTableMatchesReference) {
  ASSERT_EQ(std::size(kReal) + std::size(kBool), 50u);
  const Vector x = point();
  for (const auto& g : kReal) {
    const Expression e = Expression::parse(g.text, ctx3());
    ASSERT_EQ(e.type(), Type::real) << g.text;
    const double v = e.eval(x);
    if (g.exact) {
      EXPECT_EQ(v, g.expected) << g.text;
    } else {
      EXPECT_NEAR(v, g.expected, 1e-12) << g.text;
    }
  }
}

TEST(ExprGolden, BooleanTableMatchesReference) {
  const Vector x = point();
  for (const auto& g : kBool) {
    const Expression e = Expression::parse(g.text, ctx3());
    ASSERT_EQ(e.type(), Type::boolean) << g.text;
    EXPECT_EQ(e.test(x), g.expected) << g.text;
  }
}

TEST(ExprGolden, CanonicalTextReparsesToSameTree) {
  for (const auto& g : kReal) {
    const Expression e = Expression::parse(g.text, ctx3());
    const Expression again = Expression::parse(e.to_string(), ctx3());
    EXPECT_TRUE(e == again) << g.text << " -> " << e.to_string();
    EXPECT_EQ(again.to_string(), e.to_string());
  }
  for (const auto& g : kBool) {
    const Expression e = Expression::parse(g.text, ctx3());
    EXPECT_TRUE(e == Expression::parse(e.to_string(), ctx3())) << e.to_string();
  }
}

TEST(Expr, CanonicalSpelling) {
  EXPECT_EQ(Expression::parse("x0>=1&&x1<2", ctx3()).to_string(), "x0 >= 1 and x1 < 2");
  EXPECT_EQ(Expression::parse("(x0 + x1) + x2", ctx3()).to_string(), "x0 + x1 + x2");
  EXPECT_EQ(Expression::parse("x0 + (x1 + x2)", ctx3()).to_string(), "x0 + (x1 + x2)");
  EXPECT_EQ(Expression::parse("0.3", ctx3()).to_string(), "0.3");
  EXPECT_EQ(Expression::parse("x0 \xE2\x89\xA4 1", ctx3()).to_string(), "x0 <= 1");
}

TEST(Expr, PiecewiseIsBooleanGuardedReal) {
  Context c;
  c.x_dim = 2;
  const Expression e = Expression::parse("piecewise(x0 >= 1, 1 - x1, x1)", c);
  EXPECT_EQ(e.type(), Type::real);
  EXPECT_EQ(e.root().args[0]->type, Type::boolean);
}

TEST(Expr, UnknownIdentifierHasPosition) {
  try {
    Expression::parse("x0 + foo", ctx3(), {4, 10});
    FAIL();
  } catch (const DiagnosticError& e) {
    ASSERT_EQ(e.diagnostics().size(), 1u);
    EXPECT_EQ(e.diagnostics()[0].pos.line, 4u);
    EXPECT_EQ(e.diagnostics()[0].pos.column, 15u);
    EXPECT_NE(e.diagnostics()[0].message.find("foo"), std::string::npos);
  }
}

TEST(Expr, TypeErrorsAreReported) {
  const char* bad[] = {"x0 + (x1 < 2)", "not x0", "piecewise(x0, 1, 2)", "piecewise(x0 < 1, 1, x1 < 2)",
                       "x0 < x1 < x2", "sqrt(x0, x1)", "frob(x0)", "x3", "y0", "x0 +", "(x0", "x0 $ 1",
                       "x01"};
  for (const char* text : bad) {
    EXPECT_THROW(Expression::parse(text, ctx3()), DiagnosticError) << text;
  }
}

TEST(Expr, DomainGuardsThrow) {
  const Vector x = point();
  EXPECT_THROW(Expression::parse("log(x1)", ctx3()).eval(x), hybrid::Error);
  EXPECT_THROW(Expression::parse("sqrt(x1)", ctx3()).eval(x), hybrid::Error);
  EXPECT_THROW(Expression::parse("1 / (x0 - 0.5)", ctx3()).eval(x), hybrid::Error);
  EXPECT_THROW(Expression::parse("pow(x1, 0.5)", ctx3()).eval(x), hybrid::Error);
}

TEST(Expr, RelationsSeeBothFamilies) {
  Context c;
  c.x_dim = 2;
  c.y_dim = 2;
  c.allow_y = true;
  const Expression e = Expression::parse("x0 = 0 and y0 = 0 and x1 * y1 < 0", c);
  Vector before(2), after(2);
  before << 0.0, -1.0;
  after << 0.0, 0.5;
  EXPECT_TRUE(e.test(before, after));
  after[1] = -0.5;
  EXPECT_FALSE(e.test(before, after));
}

TEST(Expr, TupleParsing) {
  const auto t = Expression::parse_tuple("(x0, -x1, 2 * x2)", ctx3());
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t[1].eval(point()), 2.0);
  EXPECT_TRUE(Expression::parse_tuple("()", ctx3()).empty());
  EXPECT_THROW(Expression::parse_tuple("(x0 < 1)", ctx3()), DiagnosticError);
  EXPECT_THROW(Expression::parse_tuple("(x0", ctx3()), DiagnosticError);
}

TEST(Expr, GradientMatchesHandDerivatives) {
  const Vector x = point();
  Vector g;
  const double v = Expression::parse("x0 * x1 + x2 ^ 2", ctx3()).eval_gradient(x, g);
  EXPECT_EQ(v, 8.0);
  EXPECT_EQ(g[0], -2.0);
  EXPECT_EQ(g[1], 0.5);
  EXPECT_EQ(g[2], 6.0);

  Expression::parse("pow(1 - 2 * log(x0), -0.5)", ctx3()).eval_gradient(x, g);
  const double f = std::pow(1.0 - 2.0 * std::log(0.5), -0.5);
  EXPECT_NEAR(g[0], f * f * f / 0.5, 1e-12);

  Expression::parse("piecewise(x0 > 0, exp(x0), -x0)", ctx3()).eval_gradient(x, g);
  EXPECT_NEAR(g[0], std::exp(0.5), 1e-12);
  Expression::parse("sqrt(x2) / x1 - log(x0)", ctx3()).eval_gradient(x, g);
  EXPECT_NEAR(g[0], -2.0, 1e-12);
  EXPECT_NEAR(g[1], -std::sqrt(3.0) / 4.0, 1e-12);
  EXPECT_NEAR(g[2], 1.0 / (2.0 * std::sqrt(3.0) * -2.0), 1e-12);
}

TEST(Expr, RelaxedTestWidensEveryComparison) {
  Context c;
  c.x_dim = 1;
  Vector x(1);
  x << 1.0 - 1e-10;
  const Expression ge = Expression::parse("x0 >= 1", c);
  EXPECT_FALSE(ge.test(x));
  EXPECT_TRUE(ge.test(x, Vector(), 1e-9));
  const Expression not_lt = Expression::parse("not x0 < 1", c);
  EXPECT_FALSE(not_lt.test(x));
  EXPECT_TRUE(not_lt.test(x, Vector(), 1e-9));
  const Expression eq = Expression::parse("x0 = 1 and not (x0 > 2 or x0 < 0)", c);
  EXPECT_TRUE(eq.test(x, Vector(), 1e-9));
  EXPECT_FALSE(eq.test(x, Vector(), 1e-11));
}
