#include <random>

#include "doctest.h"

#include "cbn/polynomial.hpp"

using namespace cbn;

namespace {

Rational q(long n, long d = 1) {
  Rational r(n, d);
  r.canonicalize();
  return r;
}

const std::vector<std::string> kNames = {"a", "b", "c", "d", "e"};

Polynomial random_polynomial(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(0, 6), var_pick(0, 4), power(0, 2);
  std::uniform_int_distribution<long> num(-9, 9), den(1, 5);
  Polynomial p;
  int n = count(rng);
  for (int i = 0; i < n; ++i) {
    Polynomial m(q(num(rng), den(rng)));
    int budget = 4;
    for (int v = 0; v < 5 && budget > 0; ++v) {
      int k = std::min(power(rng), budget);
      if (var_pick(rng) < 2) continue;
      m *= Polynomial::variable(kNames[static_cast<std::size_t>(v)]).pow(static_cast<unsigned>(k));
      budget -= k;
    }
    p += m;
  }
  return p;
}

Assignment random_assignment(std::mt19937_64& rng) {
  std::uniform_int_distribution<long> num(-12, 12), den(1, 7);
  Assignment a;
  for (const auto& n : kNames) a[n] = q(num(rng), den(rng));
  return a;
}

Term random_term(std::mt19937_64& rng, int depth, bool allow_div) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : (allow_div ? 6 : 5));
  switch (pick(rng)) {
    case 0: return Term::constant(q(std::uniform_int_distribution<long>(-6, 6)(rng), std::uniform_int_distribution<long>(1, 4)(rng)));
    case 1: return Term::var(kNames[std::uniform_int_distribution<std::size_t>(0, 2)(rng)]);
    case 2: return Term::add(random_term(rng, depth - 1, allow_div), random_term(rng, depth - 1, allow_div));
    case 3: return Term::mul(random_term(rng, depth - 1, allow_div), random_term(rng, depth - 1, allow_div));
    case 4: return Term::neg(random_term(rng, depth - 1, allow_div));
    case 5: return Term::sub(random_term(rng, depth - 1, allow_div), random_term(rng, depth - 1, allow_div));
    default: return Term::div(random_term(rng, depth - 1, allow_div), random_term(rng, depth - 1, allow_div));
  }
}

}  // namespace

TEST_CASE("canonical form basics") {
  CHECK(Polynomial().is_zero());
  CHECK(Polynomial(q(0)).is_zero());
  Polynomial x = Polynomial::variable("x");
  CHECK((x - x).is_zero());
  CHECK((x - x).variables().empty());
  CHECK((x * x).degree_in("x") == 2);
  CHECK(to_string(Polynomial(q(3)) + x * x * q(-1, 2) + x) == "-0.5*x*x + x + 3");
  CHECK(to_string(-x + Polynomial(q(1))) == "-x + 1");
}

TEST_CASE("to_rational_fn") {
  RationalFn core = to_rational_fn(parse_term("1-0.5*x"));
  CHECK(core.is_polynomial());
  CHECK(core.den() == Polynomial(q(1)));
  CHECK(core.num() == Polynomial(q(1)) - Polynomial::variable("x") * q(1, 2));

  RationalFn quot = to_rational_fn(parse_term("(a/b)*(c/d)"));
  Polynomial a = Polynomial::variable("a"), b = Polynomial::variable("b");
  Polynomial c = Polynomial::variable("c"), d = Polynomial::variable("d");
  CHECK(quot.num() == a * c);
  CHECK(quot.den() == b * d);

  RationalFn scaled = to_rational_fn(parse_term("x/4"));
  CHECK(scaled.is_polynomial());
  CHECK(scaled.num() == Polynomial::variable("x") * q(1, 4));

  CHECK_THROWS_AS(to_rational_fn(parse_term("1/(x-x)")), EvaluationError);
}

TEST_CASE("simplify examples") {
  CHECK(simplify(parse_term("x + 0.3333 + (0.6667 - x)")) == Term::constant(1));
  CHECK(simplify(parse_term("0.5*x + (1-0.5*x)")) == Term::constant(1));
  CHECK(simplify(parse_term("x*0")) == Term::constant(0));
}

TEST_CASE("printed holmes marginal expands to its canonical quadratic") {
  // The factored form as published; its expansion is checked by hand as
  // -0.305 x^2 + 1.1 x + 0.05.
  Term printed = parse_term(
      "0.495*x*x + 0.5*x*(-0.95*x + 0.95) + 0.7*x*(-0.5*x + 1) + 1.0*(-0.5*x + 1)*(-0.05*x + 0.05)");
  Polynomial expected = Polynomial::variable("x").pow(2) * q(-305, 1000) + Polynomial::variable("x") * q(11, 10) +
                        Polynomial(q(1, 20));
  RationalFn rf = to_rational_fn(printed);
  CHECK(rf.is_polynomial());
  CHECK(rf.num() == expected);
  CHECK(rf.evaluate({{"x", q(3, 10)}}) == q(35255, 100000));
}

TEST_CASE("polynomial ring laws on random sparse polynomials") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 300; ++i) {
    Polynomial p = random_polynomial(rng), r = random_polynomial(rng), s = random_polynomial(rng);
    CHECK(p + r == r + p);
    CHECK(p * r == r * p);
    CHECK((p + r) + s == p + (r + s));
    CHECK((p * r) * s == p * (r * s));
    CHECK(p * (r + s) == p * r + p * s);
    CHECK(p - p == Polynomial());
    Assignment a = random_assignment(rng);
    CHECK((p * r).evaluate(a) == p.evaluate(a) * r.evaluate(a));
    CHECK((p + r).evaluate(a) == p.evaluate(a) + r.evaluate(a));
  }
}

TEST_CASE("evaluation homomorphism and normal-form soundness") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 400; ++i) {
    Term t = random_term(rng, 5, false);
    Assignment a = random_assignment(rng);
    CHECK(evaluate(simplify(t), a) == evaluate(t, a));
  }
  int checked = 0;
  for (int i = 0; i < 600; ++i) {
    Term t = random_term(rng, 4, true);
    Assignment a = random_assignment(rng);
    Rational direct;
    try {
      direct = evaluate(t, a);
    } catch (const EvaluationError&) {
      continue;
    }
    RationalFn rf;
    try {
      rf = to_rational_fn(t);
    } catch (const EvaluationError&) {
      continue;
    }
    Rational den = rf.den().evaluate(a);
    if (den == 0) continue;
    CHECK(rf.num().evaluate(a) / den == direct);
    ++checked;
  }
  CHECK(checked > 200);
}

TEST_CASE("printed normal forms parse back to the same polynomial") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    Polynomial p = random_polynomial(rng);
    Term t = p.to_term();
    CHECK(parse_term(to_string(t)) == t);
    CHECK(to_rational_fn(t).num() == p);
  }
  Polynomial xy = Polynomial::variable("x") * Polynomial::variable("y");
  CHECK(to_string(-xy) == "-x*y");
}
