#include <doctest.h>

#include <cmath>

#include "bcp/error.hpp"
#include "bcp/expression.hpp"

using bcp::Expression;

TEST_CASE("arithmetic and precedence") {
  CHECK(Expression::parse("1 + 2 * 3")(0.0) == 7.0);
  CHECK(Expression::parse("(1 + 2) * 3")(0.0) == 9.0);
  CHECK(Expression::parse("2^3^2")(0.0) == 512.0);
  CHECK(Expression::parse("-x^2")(0.0, 3.0) == -9.0);
  CHECK(Expression::parse("t / 4 - x")(2.0, 1.0) == doctest::Approx(-0.5));
}

TEST_CASE("functions and constants") {
  const auto e = Expression::parse("0.5 + 0.25*sin(3*pi*t)");
  CHECK(e(1.0 / 6.0) == doctest::Approx(0.75));
  CHECK(Expression::parse("exp(log(2)) + sqrt(16) + tanh(0) + cos(0)")(0.0) == doctest::Approx(7.0));
  CHECK(Expression::parse("e")(0.0) == doctest::Approx(std::exp(1.0)));
  CHECK(bcp::eval_constant("3*pi") == doctest::Approx(3.0 * M_PI));
}

TEST_CASE("variable usage flags") {
  const auto e = Expression::parse("1 + t");
  CHECK(e.uses_t());
  CHECK_FALSE(e.uses_x());
  CHECK(Expression::parse("x*x").uses_x());
}

TEST_CASE("malformed input is a config error") {
  CHECK_THROWS_AS(Expression::parse("1 +"), bcp::ConfigError);
  CHECK_THROWS_AS(Expression::parse("foo(t)"), bcp::ConfigError);
  CHECK_THROWS_AS(Expression::parse("(1"), bcp::ConfigError);
  CHECK_THROWS_AS(Expression::parse("y"), bcp::ConfigError);
  CHECK_THROWS_AS(bcp::eval_constant("t + 1"), bcp::ConfigError);
}
