#include <doctest.h>

#include <cmath>

#include "splitting/rational.hpp"

using splitting::Rational;

TEST_CASE("parse accepts num/den and integers, canonicalizes") {
  CHECK(Rational::parse("2/4")->str() == "1/2");
  CHECK(Rational::parse("3")->str() == "3/1");
  CHECK(Rational::parse("-6/8")->str() == "-3/4");
  CHECK(Rational::parse("0/5")->str() == "0/1");
}

TEST_CASE("parse rejects malformed text") {
  for (const char* bad : {"", "/", "1/", "/2", "1/0", "a/b", "1.5", "1/2/3", "- 1"}) {
    CAPTURE(bad);
    CHECK_FALSE(Rational::parse(bad).has_value());
  }
}

TEST_CASE("arithmetic is exact") {
  const Rational third(1, 3);
  CHECK(third + third + third == Rational(1));
  CHECK(Rational(23, 3) - Rational(5) == Rational(8, 3));
  CHECK(pow(Rational(2, 3), 3) == Rational(8, 27));
  CHECK(Rational(1, 3) < Rational(1, 2));
}

TEST_CASE("to_double rounds correctly") {
  CHECK(Rational(1, 3).to_double() == 1.0 / 3.0);
  CHECK(Rational(2, 3).to_double() == 2.0 / 3.0);
  CHECK(Rational(1, 10).to_double() == 0.1);
}

TEST_CASE("log handles large numerators and denominators") {
  CHECK(Rational(1, 2).log() == doctest::Approx(-std::log(2.0)).epsilon(1e-15));
  const auto big = pow(Rational(1, 7), 40);
  CHECK(big.log() == doctest::Approx(-40 * std::log(7.0)).epsilon(1e-14));
}
