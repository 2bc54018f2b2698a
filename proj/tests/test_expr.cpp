#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "rsg/error.hpp"
#include "rsg/expr.hpp"

using namespace rsg;

namespace {

Expression random_expression(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 9);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  switch (pick(rng)) {
    case 0: return Expression::constant(std::round(coef(rng) * 100) / 100);
    case 1: return Expression::variable(std::uniform_int_distribution<int>(1, 4)(rng));
    case 2: return random_expression(rng, depth - 1) + random_expression(rng, depth - 1);
    case 3: return random_expression(rng, depth - 1) - random_expression(rng, depth - 1);
    case 4:
    case 5: return random_expression(rng, depth - 1) * random_expression(rng, depth - 1);
    case 6: return pow(random_expression(rng, depth - 1), std::uniform_int_distribution<int>(2, 3)(rng));
    case 7: return sin(random_expression(rng, depth - 1));
    case 8: return cos(random_expression(rng, depth - 1));
    default: return -random_expression(rng, depth - 1);
  }
}

Vec4 random_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return Vec4(u(rng), u(rng), u(rng), u(rng));
}

}  // namespace

TEST(Parse, Precedence) {
  const Vec4 p(2, 3, 5, 7);
  EXPECT_DOUBLE_EQ(eval(parse("x1 + x2 * x3"), p), 17.0);
  EXPECT_DOUBLE_EQ(eval(parse("(x1 + x2) * x3"), p), 25.0);
  EXPECT_DOUBLE_EQ(eval(parse("-x1^2"), p), -4.0);
  EXPECT_DOUBLE_EQ(eval(parse("x4 - x3 - x2"), p), -1.0);
  EXPECT_DOUBLE_EQ(eval(parse("x4 / x1 / x1"), p), 1.75);
  EXPECT_DOUBLE_EQ(eval(parse("2*x1^3"), p), 16.0);
  EXPECT_DOUBLE_EQ(eval(parse("1.5e1 + .5"), p), 15.5);
}

TEST(Parse, Functions) {
  const Vec4 p(0.3, -0.2, 0.1, 0.0);
  EXPECT_DOUBLE_EQ(eval(parse("sin(x1) + cos(x2) * exp(x3)"), p), std::sin(0.3) + std::cos(-0.2) * std::exp(0.1));
}

TEST(Parse, SyntaxErrorOffset) {
  try {
    parse("x1 + * x2");
    FAIL() << "expected a syntax error";
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.offset(), 5u);
    EXPECT_EQ(e.kind(), ErrorKind::Syntax);
    EXPECT_FALSE(e.expected().empty());
  }
  EXPECT_THROW(parse(""), SyntaxError);
  EXPECT_THROW(parse("(x1 + x2"), SyntaxError);
  EXPECT_THROW(parse("x1 x2"), SyntaxError);
  EXPECT_THROW(parse("x1^x2"), SyntaxError);
}

TEST(Parse, UnknownIdentifier) {
  try {
    parse("x1 + y");
    FAIL() << "expected an unknown identifier";
  } catch (const UnknownIdentifier& e) {
    EXPECT_EQ(e.offset(), 5u);
    EXPECT_EQ(e.name(), "y");
  }
  EXPECT_THROW(parse("x5"), UnknownIdentifier);
  EXPECT_THROW(parse("tan(x1)"), UnknownIdentifier);
}

TEST(Eval, DomainErrors) {
  EXPECT_THROW(eval(parse("1 / x1"), Vec4::Zero()), Error);
  try {
    eval_jet2(parse("x2 / (x1 - x1)"), Vec4(1, 1, 1, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Domain);
  }
}

TEST(Jet2, AnalyticPolynomial) {
  // f = x1^2 x2 + 3 x3 x4
  const Jet2 j = eval_jet2(parse("x1^2*x2 + 3*x3*x4"), Vec4(1, 2, 3, 4));
  EXPECT_DOUBLE_EQ(j.value, 2 + 36);
  EXPECT_DOUBLE_EQ(j.grad[0], 4);
  EXPECT_DOUBLE_EQ(j.grad[1], 1);
  EXPECT_DOUBLE_EQ(j.grad[2], 12);
  EXPECT_DOUBLE_EQ(j.grad[3], 9);
  EXPECT_DOUBLE_EQ(j.hess(0, 0), 4);
  EXPECT_DOUBLE_EQ(j.hess(0, 1), 2);
  EXPECT_DOUBLE_EQ(j.hess(1, 0), 2);
  EXPECT_DOUBLE_EQ(j.hess(2, 3), 3);
  EXPECT_DOUBLE_EQ(j.hess(1, 1), 0);
}

TEST(Jet2, HessianIsSymmetric) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const Mat4 h = eval_jet2(random_expression(rng, 4), random_point(rng)).hessian();
    EXPECT_EQ(h, h.transpose());
  }
}

// Oracle: central finite differences of the value for the gradient, and of the
// gradient for the Hessian.
TEST(Jet2, MatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  const double h = 1e-5;
  for (int trial = 0; trial < 300; ++trial) {
    const Expression e = random_expression(rng, 4);
    const Vec4 p = random_point(rng);
    const Jet2 j = eval_jet2(e, p);
    EXPECT_NEAR(j.value, eval(e, p), 1e-12 * (1 + std::abs(j.value)));
    for (int i = 0; i < 4; ++i) {
      Vec4 a = p, b = p;
      a[i] += h;
      b[i] -= h;
      const double fd = (eval(e, a) - eval(e, b)) / (2 * h);
      EXPECT_NEAR(j.grad[i], fd, 1e-5 * (1 + std::abs(fd))) << e.to_string();
      const Vec4 gd = (eval_jet2(e, a).grad - eval_jet2(e, b).grad) / (2 * h);
      for (int k = 0; k < 4; ++k) EXPECT_NEAR(j.hess(i, k), gd[k], 1e-5 * (1 + std::abs(gd[k]))) << e.to_string();
    }
  }
}

TEST(Expression, ToStringRoundTrip) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const Expression e = random_expression(rng, 5);
    const std::string text = e.to_string();
    const Expression back = parse(text);
    EXPECT_EQ(back.to_string(), text);
    const Vec4 p = random_point(rng);
    EXPECT_EQ(eval(back, p), eval(e, p)) << text;
  }
}
