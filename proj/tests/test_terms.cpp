#include <random>

#include "doctest.h"

#include "cbn/term.hpp"

using namespace cbn;

namespace {

Rational q(long n, long d = 1) {
  Rational r(n, d);
  r.canonicalize();
  return r;
}

Term random_term(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 6);
  static const char* names[] = {"x", "y", "z", "mp_a"};
  switch (pick(rng)) {
    case 0: {
      std::uniform_int_distribution<long> num(1, 40), den(1, 12), sign(0, 1);
      return Term::constant(q(sign(rng) ? num(rng) : -num(rng), den(rng)));
    }
    case 1:
      return Term::var(names[std::uniform_int_distribution<int>(0, 3)(rng)]);
    case 2: return Term::add(random_term(rng, depth - 1), random_term(rng, depth - 1));
    case 3: return Term::mul(random_term(rng, depth - 1), random_term(rng, depth - 1));
    case 4: return Term::neg(random_term(rng, depth - 1));
    case 5: return Term::sub(random_term(rng, depth - 1), random_term(rng, depth - 1));
    default: return Term::div(random_term(rng, depth - 1), random_term(rng, depth - 1));
  }
}

Constraint random_constraint(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 5 : 9);
  auto t = [&] { return random_term(rng, 2); };
  switch (pick(rng)) {
    case 0: return Constraint::leq(t(), t());
    case 1: return Constraint::lt(t(), t());
    case 2: return Constraint::eq(t(), t());
    case 3: return Constraint::geq(t(), t());
    case 4: return Constraint::gt(t(), t());
    case 5: return Constraint::truth();
    case 6: return Constraint::negate(random_constraint(rng, depth - 1));
    case 7: return Constraint::disj(random_constraint(rng, depth - 1), random_constraint(rng, depth - 1));
    default: return Constraint::conj(random_constraint(rng, depth - 1), random_constraint(rng, depth - 1));
  }
}

Constraint fold_constraint(const Constraint& c) {
  using K = Constraint::Kind;
  switch (c.kind()) {
    case K::True: return c;
    case K::Leq: return Constraint::leq(fold_literals(c.left()), fold_literals(c.right()));
    case K::Lt: return Constraint::lt(fold_literals(c.left()), fold_literals(c.right()));
    case K::Eq: return Constraint::eq(fold_literals(c.left()), fold_literals(c.right()));
    case K::Geq: return Constraint::geq(fold_literals(c.left()), fold_literals(c.right()));
    case K::Gt: return Constraint::gt(fold_literals(c.left()), fold_literals(c.right()));
    case K::Not: return Constraint::negate(fold_constraint(c.first()));
    case K::And: return Constraint::conj(fold_constraint(c.first()), fold_constraint(c.second()));
    case K::Or: return Constraint::disj(fold_constraint(c.first()), fold_constraint(c.second()));
  }
  return c;
}

}  // namespace

TEST_CASE("decimal literals are exact") {
  CHECK(parse_decimal("0.05") == q(1, 20));
  CHECK(parse_decimal("-1.25") == q(-5, 4));
  CHECK(parse_decimal("2.5e-3") == q(1, 400));
  CHECK(parse_decimal("0.299999999930?") == Rational(29999999993, 100000000000));
  CHECK_THROWS_AS(parse_decimal("1.2.3"), std::invalid_argument);
  CHECK(to_string(q(1, 20)) == "0.05");
  CHECK(to_string(q(-5, 4)) == "-1.25");
  CHECK(to_string(q(1, 3)) == "1/3");
  CHECK(to_string(q(7)) == "7");
  CHECK(round_significant(q(2, 3), 3) == q(667, 1000));
  CHECK(round_significant(q(-1, 8), 2) == q(-13, 100));
}

TEST_CASE("parse_term builds the expected trees") {
  Term a = parse_term("0.5*x");
  CHECK(a == Term::mul(Term::constant(q(1, 2)), Term::var("x")));

  Term b = parse_term("1-0.5*x");
  CHECK(b == Term::sub(Term::constant(1), Term::mul(Term::constant(q(1, 2)), Term::var("x"))));

  Constraint c = parse_constraint("mp_H < 0.3");
  CHECK(c == Constraint::lt(Term::var("mp_H"), Term::constant(q(3, 10))));

  CHECK(parse_term("2/4") == Term::constant(q(1, 2)));
  CHECK(parse_term("-3") == Term::constant(-3));
  CHECK(parse_term("a - b - c") == Term::sub(Term::sub(Term::var("a"), Term::var("b")), Term::var("c")));
  CHECK(parse_term("a / b * c") == Term::mul(Term::div(Term::var("a"), Term::var("b")), Term::var("c")));
}

TEST_CASE("parse errors carry positions") {
  try {
    parse_term("x + ^2");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.position() == 4);
    CHECK(std::string(e.what()).find("unknown operator") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_term("x +"), ParseError);
  CHECK_THROWS_AS(parse_term("(x"), ParseError);
  CHECK_THROWS_AS(parse_term("1/0"), ParseError);
  CHECK_THROWS_AS(parse_constraint("x"), ParseError);
  CHECK_THROWS_AS(parse_constraint("exists y: y < 1"), ParseError);
}

TEST_CASE("constraints: chains, parentheses, boolean operators") {
  Constraint c = parse_constraint("0.1 <= x <= 0.3");
  CHECK(c == Constraint::conj(Constraint::leq(Term::constant(q(1, 10)), Term::var("x")),
                              Constraint::leq(Term::var("x"), Term::constant(q(3, 10)))));
  CHECK(parse_constraint("(x + 1) <= 2") == Constraint::leq(Term::add(Term::var("x"), Term::constant(1)), Term::constant(2)));
  CHECK(parse_constraint("!(x < 1) | true").kind() == Constraint::Kind::Or);
  CHECK(parse_constraint("x < 1 & y < 1 | z < 1").kind() == Constraint::Kind::Or);
  CHECK(parse_constraint("false") == Constraint::falsity());
}

TEST_CASE("queries: existential prefix") {
  Query qy = parse_query("exists x: exists y: x + y < 1");
  CHECK(qy.is_prenex_existential());
  REQUIRE(qy.prefix().size() == 2);
  CHECK(qy.prefix()[0].name == "x");
  CHECK(qy.matrix() == parse_constraint("x + y < 1"));

  Query nq = parse_query("!(exists x: x < 0)");
  CHECK_FALSE(nq.is_prenex_existential());
  CHECK_FALSE(nq.is_quantifier_free());
}

TEST_CASE("evaluate reproduces the holmes marginal at the bounds") {
  Term canonical = parse_term("-0.305*x*x + 1.1*x + 0.05");
  CHECK(evaluate(canonical, {{"x", q(3, 10)}}) == q(35255, 100000));
  CHECK(evaluate(canonical, {{"x", q(1, 10)}}) == q(15695, 100000));
  CHECK(evaluate(Term::constant(q(7, 3)), {}) == q(7, 3));
  CHECK_THROWS_AS(evaluate(Term::var("nope"), {}), EvaluationError);
  CHECK_THROWS_AS(evaluate(parse_term("1/x"), {{"x", q(0)}}), EvaluationError);
}

TEST_CASE("derived operators reduce to the core") {
  Constraint c = parse_constraint("x = 1 | y >= 2 & !(z > 0)");
  Constraint core = c.to_core();
  std::function<void(const Constraint&)> check_core = [&](const Constraint& k) {
    using K = Constraint::Kind;
    CHECK((k.kind() == K::True || k.kind() == K::Leq || k.kind() == K::Lt || k.kind() == K::Not || k.kind() == K::And));
    if (k.kind() == K::Not) check_core(k.first());
    if (k.kind() == K::And) {
      check_core(k.first());
      check_core(k.second());
    }
  };
  check_core(core);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<long> v(-3, 3);
  for (int i = 0; i < 200; ++i) {
    Assignment a{{"x", q(v(rng))}, {"y", q(v(rng))}, {"z", q(v(rng))}};
    CHECK(holds(c, a) == holds(core, a));
  }
}

TEST_CASE("violation measures distance to satisfaction") {
  Assignment a{{"x", q(1, 2)}};
  CHECK(*violation(parse_constraint("x <= 0.3"), a) == q(1, 5));
  CHECK(*violation(parse_constraint("x >= 0.3"), a) == 0);
  CHECK(*violation(parse_constraint("x = 0.3"), a) == q(1, 5));
  CHECK(*violation(parse_constraint("x < 0.5"), a) == 0);
  CHECK(*violation(parse_constraint("x <= 0.3 | x >= 0.6"), a) == q(1, 10));
  CHECK_FALSE(violation(parse_constraint("false"), a).has_value());
}

TEST_CASE("parser round-trip on random terms and constraints") {
  std::mt19937_64 rng(20240611);
  for (int i = 0; i < 500; ++i) {
    Term t = random_term(rng, 4);
    std::string text = to_string(t);
    INFO(text);
    Term back = parse_term(text);
    CHECK(back == fold_literals(t));
    CHECK(to_string(back) == to_string(fold_literals(t)));
  }
  for (int i = 0; i < 300; ++i) {
    Constraint c = random_constraint(rng, 3);
    std::string text = to_string(c);
    INFO(text);
    CHECK(parse_constraint(text) == fold_constraint(c));
  }
}
