#include <gtest/gtest.h>

#include "adt/cost.hpp"
#include "adt/rational.hpp"

using namespace adt;

TEST(Rational, ParsesFractionsIntegersAndDecimals) {
  EXPECT_EQ(parse_rational("3/6"), Rational(1, 2));
  EXPECT_EQ(parse_rational("-7"), Rational(-7));
  EXPECT_EQ(parse_rational("0.125"), Rational(1, 8));
  EXPECT_EQ(parse_rational("-1.5"), Rational(-3, 2));
}

TEST(Rational, RejectsMalformedText) {
  for (const char* bad : {"", "1/0", "a", "1//2", "1.2.3", "--1", "1/2/3"}) {
    EXPECT_THROW(parse_rational(bad), Error) << bad;
  }
}

TEST(Rational, DecimalRoundingIsHalfAwayFromZero) {
  EXPECT_EQ(parse_decimal("0.125", 2), Rational(13, 100));
  EXPECT_EQ(parse_decimal("-0.125", 2), Rational(-13, 100));
  EXPECT_EQ(parse_decimal("0.124", 2), Rational(12, 100));
  EXPECT_EQ(parse_decimal("0.1", 12), Rational(1, 10));
  EXPECT_EQ(parse_decimal("1.2345678901235", 12), Rational(1234567890124, 1000000000000));
  EXPECT_EQ(parse_decimal("7", 0), Rational(7));
}

TEST(Rational, DecimalFormatting) {
  EXPECT_EQ(to_decimal_string(Rational(11, 10)), "1.1");
  EXPECT_EQ(to_decimal_string(Rational(1, 3), 4), "0.3333");
  EXPECT_EQ(to_decimal_string(Rational(2, 3), 4), "0.6667");
  EXPECT_EQ(to_decimal_string(Rational(-1, 8), 2), "-0.13");
  EXPECT_EQ(to_decimal_string(Rational(-1, 1000), 2), "0");
  EXPECT_EQ(to_string(Value{Rational(1, 2), Rational(-3)}), "(1/2,-3)");
}

TEST(Rational, ExactRoots) {
  EXPECT_EQ(exact_root(Rational(9, 4), 2), Rational(3, 2));
  EXPECT_EQ(exact_root(Rational(8, 27), 3), Rational(2, 3));
  EXPECT_FALSE(exact_root(Rational(2), 2).has_value());
  EXPECT_FALSE(exact_root(Rational(-4), 2).has_value());
  EXPECT_EQ(exact_root(Rational(5, 7), 1), Rational(5, 7));
}

TEST(Rational, LcmAndPow) {
  EXPECT_EQ(lcm(Integer(4), Integer(6)), Integer(12));
  EXPECT_EQ(pow(Rational(-2, 3), 3), Rational(-8, 27));
  EXPECT_EQ(pow(Rational(5), 0), Rational(1));
}

TEST(Cost, StaysExactUntilMixedWithApproximation) {
  Cost c = Rational(1, 3);
  c += Rational(1, 6);
  ASSERT_TRUE(c.exact());
  EXPECT_EQ(c.rational(), Rational(1, 2));
  c *= Rational(4);
  EXPECT_EQ(c, Cost(2));
  Cost d = c + Cost::approximate(0.5);
  EXPECT_FALSE(d.exact());
  EXPECT_DOUBLE_EQ(d.to_double(), 2.5);
  EXPECT_THROW(d.rational(), Error);
  EXPECT_TRUE(approx_equal(d, Cost(Rational(5, 2)), 1e-12));
  EXPECT_TRUE(Cost(1) < Cost(Rational(3, 2)));
  EXPECT_EQ(min(Cost(3), Cost(2)), Cost(2));
}
