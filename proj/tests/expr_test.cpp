#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "ksnet/expr.hpp"

using ksnet::Expression;

TEST(Expression, InitialDataExamples) {
  const Expression c0 = Expression::parse("1-cos(pi*x)");
  EXPECT_DOUBLE_EQ(c0(1.0), 2.0);
  EXPECT_DOUBLE_EQ(c0(0.0), 0.0);
  EXPECT_NEAR(c0(0.5), 1.0, 1e-15);

  const Expression four = Expression::parse("4");
  EXPECT_EQ(four.kind(), Expression::Kind::Number);
  EXPECT_EQ(four(123.0), 4.0);
  EXPECT_TRUE(four.is_constant());
  EXPECT_FALSE(c0.is_constant());

  const Expression law = Expression::parse("2/(1+w)", "w");
  EXPECT_DOUBLE_EQ(law(0.0), 2.0);
  EXPECT_DOUBLE_EQ(law(1.0), 1.0);
}

TEST(Expression, Precedence) {
  EXPECT_EQ(Expression::parse("1+2*3")(0), 7.0);
  EXPECT_EQ(Expression::parse("-2^2")(0), -4.0);
  EXPECT_EQ(Expression::parse("(-2)^2")(0), 4.0);
  EXPECT_EQ(Expression::parse("2^3^2")(0), 512.0);  // right-associative
  EXPECT_EQ(Expression::parse("2^-1")(0), 0.5);
  EXPECT_EQ(Expression::parse("8/4/2")(0), 1.0);
  EXPECT_EQ(Expression::parse("10-4-3")(0), 3.0);
  EXPECT_EQ(Expression::parse("--3")(0), 3.0);
  EXPECT_DOUBLE_EQ(Expression::parse("exp(x) * sin(x) + cos(0)")(1.0), std::exp(1.0) * std::sin(1.0) + 1.0);
  EXPECT_DOUBLE_EQ(Expression::parse("pi")(0), std::numbers::pi);
  EXPECT_EQ(Expression::parse("1.5e2 + .5")(0), 150.5);
}

TEST(Expression, SyntaxErrorsCarryOffsets) {
  try {
    Expression::parse("1+*2");
    FAIL() << "expected SyntaxError";
  } catch (const ksnet::SyntaxError& e) {
    EXPECT_EQ(e.offset(), 2u);
  }
  auto offset_of = [](const std::string& text) -> std::size_t {
    try {
      Expression::parse(text);
    } catch (const ksnet::SyntaxError& e) {
      return e.offset();
    }
    return std::string::npos;
  };
  EXPECT_EQ(offset_of("(1+2"), 4u);
  EXPECT_EQ(offset_of("1 2"), 2u);
  EXPECT_EQ(offset_of(""), 0u);
  EXPECT_EQ(offset_of("sin x"), 4u);
  EXPECT_EQ(offset_of("2*)"), 2u);
}

TEST(Expression, UnknownIdentifiers) {
  EXPECT_THROW(Expression::parse("y+1"), ksnet::UnknownIdentifier);
  EXPECT_THROW(Expression::parse("x", "w"), ksnet::UnknownIdentifier);
  EXPECT_THROW(Expression::parse("tan(x)"), ksnet::UnknownIdentifier);
  EXPECT_THROW(Expression::parse("x", ""), ksnet::UnknownIdentifier);
  try {
    Expression::parse("1 + foo");
  } catch (const ksnet::UnknownIdentifier& e) {
    EXPECT_EQ(e.name(), "foo");
    EXPECT_EQ(e.offset(), 4u);
  }
}

TEST(Expression, DivisionByZero) {
  EXPECT_THROW(Expression::parse("1/x")(0.0), ksnet::DivisionByZero);
  EXPECT_THROW(Expression::parse("2/(1+w)", "w")(-1.0), ksnet::DivisionByZero);
  EXPECT_NO_THROW(Expression::parse("0/x")(1.0));
}

namespace {

std::string random_expression(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 9);
  std::uniform_real_distribution<double> num(0.0, 5.0);
  switch (pick(rng)) {
    case 0: return std::to_string(num(rng));
    case 1: return "x";
    case 2: return "pi";
    case 3: return "-" + random_expression(rng, depth - 1);
    case 4: return "(" + random_expression(rng, depth - 1) + "+" + random_expression(rng, depth - 1) + ")";
    case 5: return random_expression(rng, depth - 1) + "-" + random_expression(rng, depth - 1);
    case 6: return random_expression(rng, depth - 1) + "*" + random_expression(rng, depth - 1);
    case 7: return "sin(" + random_expression(rng, depth - 1) + ")";
    case 8: return "exp(" + random_expression(rng, depth - 1) + ")/" + "(1+x^2)";
    default: return "(" + random_expression(rng, depth - 1) + ")^2";
  }
}

}  // namespace

TEST(Expression, PrintParseRoundTrip) {
  std::mt19937 rng(42);
  for (int trial = 0; trial < 500; ++trial) {
    const std::string text = random_expression(rng, 4);
    const Expression e = Expression::parse(text);
    const Expression again = Expression::parse(e.to_string());
    EXPECT_TRUE(e == again) << text << " -> " << e.to_string();
    for (double x : {0.0, 0.3, 1.7}) {
      const double a = e(x), b = again(x);
      if (std::isfinite(a)) {
        EXPECT_EQ(a, b) << text;
      }
    }
  }
}
