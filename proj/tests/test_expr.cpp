#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "wkam/expr.hpp"

using namespace wkam;

TEST_CASE("parse and evaluate basics") {
  auto e = parse("sin(x3 - 1)", 3);
  double p1[3] = {0.0, 0.0, 1.0};
  CHECK(evaluate(e, p1) == doctest::Approx(0.0).epsilon(1e-15));

  auto c = parse("cos(x3)", 3);
  double p0[3] = {0.0, 0.0, 0.0};
  CHECK(evaluate(c, p0) == doctest::Approx(1.0));

  auto f = parse("1 - sin(x3 - 1)", 3);
  double p2[3] = {0.0, 0.0, 1.0 + M_PI / 2};
  CHECK(std::fabs(evaluate(f, p2)) <= 1e-15);

  double p3[3] = {0.0, 0.0, 1.0 + M_PI};
  CHECK(std::fabs(evaluate(e, p3)) <= 1e-15);
}

TEST_CASE("syntax errors carry offsets") {
  CHECK_THROWS_AS(parse("x1 + * 2", 3), ParseError);
  try {
    parse("x1 + * 2", 3);
  } catch (const ParseError& err) {
    CHECK(err.offset == 5);
  }
  CHECK_THROWS_AS(parse("x4", 3), ParseError);
  CHECK_THROWS_AS(parse("x0", 3), ParseError);
  CHECK_THROWS_AS(parse("x1 ^ 2.5", 3), ParseError);
  CHECK_THROWS_AS(parse("foo(x1)", 3), ParseError);
  CHECK_THROWS_AS(parse("sin x1", 3), ParseError);
}

TEST_CASE("division by zero is reported") {
  auto e = parse("x1 / x1", 2);
  double p[2] = {0.0, 0.0};
  CHECK_THROWS_AS(evaluate(e, p), EvalError);
  auto inv = parse("x1 ^ -2", 1);
  double z[1] = {0.0};
  CHECK_THROWS_AS(evaluate(inv, z), EvalError);
}

TEST_CASE("precedence") {
  double p[1] = {2.0};
  CHECK(evaluate(parse("-x1^2", 1), p) == doctest::Approx(-4.0));
  CHECK(evaluate(parse("2*x1^3", 1), p) == doctest::Approx(16.0));
  CHECK(evaluate(parse("1 - 2 - 3", 1), p) == doctest::Approx(-4.0));
  CHECK(evaluate(parse("8 / 2 / 2", 1), p) == doctest::Approx(2.0));
  CHECK(evaluate(parse("2 * -3", 1), p) == doctest::Approx(-6.0));
}

TEST_CASE("differentiate basics") {
  auto e = parse("cos(x3)", 3);
  auto d = differentiate(e, 2);
  double p[3] = {0.0, 0.0, 0.7};
  CHECK(evaluate(d, p) == doctest::Approx(-std::sin(0.7)));

  auto s = parse("sin(x3 - 1)", 3);
  auto ds = differentiate(s, 2);
  double q[3] = {0.0, 0.0, 1.0};
  CHECK(evaluate(ds, q) == doctest::Approx(1.0));

  auto prod = parse("x1 * x2", 2);
  auto dp = differentiate(prod, 0);
  double r2[2] = {3.0, 5.0};
  CHECK(evaluate(dp, r2) == doctest::Approx(5.0));

  CHECK(is_zero(differentiate(constant(4.2), 0)));
}

namespace {

Expr random_expr(std::mt19937& rng, int dim, int depth) {
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  std::uniform_int_distribution<int> kind(0, depth <= 0 ? 1 : 9);
  switch (kind(rng)) {
    case 0:
      return constant(U(rng));
    case 1:
      return variable(std::uniform_int_distribution<int>(0, dim - 1)(rng));
    case 2:
      return negate(random_expr(rng, dim, depth - 1));
    case 3:
      return add(random_expr(rng, dim, depth - 1), random_expr(rng, dim, depth - 1));
    case 4:
      return mul(random_expr(rng, dim, depth - 1), random_expr(rng, dim, depth - 1));
    case 5: {
      // denominator bounded away from zero
      auto den = add(powi(random_expr(rng, dim, depth - 1), 2),
                     constant(std::uniform_real_distribution<double>(0.5, 2.0)(rng)));
      return quotient(random_expr(rng, dim, depth - 1), den);
    }
    case 6:
      return powi(random_expr(rng, dim, depth - 1),
                  std::uniform_int_distribution<int>(0, 3)(rng));
    case 7:
      return sin_of(random_expr(rng, dim, depth - 1));
    case 8:
      return cos_of(random_expr(rng, dim, depth - 1));
    default:
      // keep exp arguments tame
      return exp_of(sin_of(random_expr(rng, dim, depth - 1)));
  }
}

}  // namespace

TEST_CASE("derivative matches central finite differences") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  const int dim = 3;
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    Expr e = random_expr(rng, dim, 4);
    for (int j = 0; j < dim; ++j) {
      Expr de = differentiate(e, j);
      double x[3] = {U(rng), U(rng), U(rng)};
      const double h = 1e-5;
      double xp[3] = {x[0], x[1], x[2]};
      double xm[3] = {x[0], x[1], x[2]};
      xp[j] += h;
      xm[j] -= h;
      try {
        double fd = (evaluate(e, xp) - evaluate(e, xm)) / (2 * h);
        double an = evaluate(de, x);
        if (!std::isfinite(fd) || std::fabs(fd) > 1e5) continue;
        CHECK(std::fabs(an - fd) <= 1e-6 * (1.0 + std::fabs(an)));
        ++checked;
      } catch (const EvalError&) {
        continue;  // sampled a pole; skip
      }
    }
  }
  CHECK(checked > 300);
}

TEST_CASE("round trip through the printer") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  const int dim = 3;
  for (int trial = 0; trial < 50; ++trial) {
    Expr e = random_expr(rng, dim, 4);
    Expr r = parse(to_string(e), dim);
    for (int k = 0; k < 100; ++k) {
      double x[3] = {U(rng), U(rng), U(rng)};
      double a, b;
      try {
        a = evaluate(e, x);
      } catch (const EvalError&) {
        continue;
      }
      b = evaluate(r, x);
      CHECK(a == b);  // identical evaluation, not just approximate
    }
  }
}
