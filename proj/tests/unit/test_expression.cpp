#include <doctest.h>

#include <cmath>

#include "fragfem/errors.hpp"
#include "fragfem/expression.hpp"

using namespace fragfem;

namespace {

double eval(const char* src, Variables v = {}) { return Expression::parse(src)(v); }

}  // namespace

TEST_CASE("hand evaluation") {
  CHECK(eval("(1+t)^3*exp(-(x1+x2)*(1+t))", {0, 0, 0, 0, 0, 0, 1.0}) == doctest::Approx(8.0).epsilon(1e-15));
  CHECK(eval("2/(y1*y2)", {0, 0, 0, 0.5, 4.0, 0, 0}) == doctest::Approx(1.0));
  CHECK(eval("x1*x2*x3", {2, 3, 4, 0, 0, 0, 0}) == 24.0);
}

TEST_CASE("precedence and associativity") {
  CHECK(eval("-2^2") == -4.0);
  CHECK(eval("2^3^2") == 512.0);
  CHECK(eval("2*3+4") == 10.0);
  CHECK(eval("2*(3+4)") == 14.0);
  CHECK(eval("8/4/2") == 1.0);
  CHECK(eval("1-2-3") == -4.0);
  CHECK(eval("2^-1") == 0.5);
  CHECK(eval("1.5e2 + .5") == 150.5);
}

TEST_CASE("errors carry positions and names") {
  CHECK_THROWS_AS(Expression::parse("1 +"), SyntaxError);
  CHECK_THROWS_AS(Expression::parse("(x1"), SyntaxError);
  CHECK_THROWS_AS(Expression::parse("sin(x1)"), UnknownIdentifier);
  try {
    Expression::parse("x1 + z");
    FAIL("expected UnknownIdentifier");
  } catch (const UnknownIdentifier& e) {
    CHECK(e.name() == "z");
  }
  try {
    Expression::parse("x1 * * 2");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.position() == 5);
  }
}

TEST_CASE("printing round trips") {
  for (const char* src : {"(1+t)^3*exp(-(x1+x2)*(1+t))", "-2^2", "2^3^2", "1/(y1*y2*y3)", "x1-(x2-x3)"}) {
    const Expression e = Expression::parse(src);
    const Expression back = Expression::parse(e.to_string());
    CHECK(back == e);
    const Variables v{0.3, 0.7, 1.1, 1.3, 1.7, 1.9, 0.4};
    CHECK(back(v) == e(v));
  }
}

TEST_CASE("symbolic derivative") {
  const Expression u = Expression::parse("(1+t)^3*exp(-(x1+x2)*(1+t))");
  const Expression du = u.derivative(Variable::t);
  for (double t : {0.0, 0.5, 2.0}) {
    const Variables v{0.4, 0.9, 0, 0, 0, 0, t};
    const double s = 1 + t, x = 1.3;
    const double exact = 3 * s * s * std::exp(-x * s) - s * s * s * x * std::exp(-x * s);
    CHECK(du(v) == doctest::Approx(exact).epsilon(1e-13));
  }
  CHECK(u.depends_on(Variable::x2));
  CHECK_FALSE(u.depends_on(Variable::y1));
  CHECK(Expression::parse("2*3").is_constant());
  CHECK_THROWS_AS(Expression::parse("2^x1").derivative(Variable::x1), Error);
}

TEST_CASE("deep expressions evaluate past the small stack") {
  std::string src = "1";
  for (int i = 0; i < 40; ++i) src = "(1+" + src + ")";
  CHECK(eval(src.c_str()) == 41.0);
  std::string right = "x1";
  for (int i = 0; i < 40; ++i) right = "x1*(1+" + right + ")";
  CHECK(std::isfinite(eval(right.c_str(), {0.5, 0, 0, 0, 0, 0, 0})));
}
