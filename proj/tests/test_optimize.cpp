#include "doctest.h"

#include <cmath>

#include "cbn/logic.hpp"
#include "cbn/optimize.hpp"
#include "support.hpp"

using namespace cbn;
using cbn::testing::q;

namespace {

OptimizeOptions checked() {
  OptimizeOptions o;
  o.check_invariants = true;
  return o;
}

/// Exact marginal by enumeration over x in [lo, hi] with `steps` intervals.
std::vector<Rational> grid_values(const ConstrainedBN& b, const MarginalSpec& spec, const Rational& lo,
                                  const Rational& hi, long steps) {
  std::vector<Rational> out;
  for (long i = 0; i <= steps; ++i) {
    Rational x = lo + (hi - lo) * i / steps;
    out.push_back(query_joint(enumerate_joint(concretize(b, {{"x", x}})), spec));
  }
  return out;
}

void check_run(const IntervalResult& r, const Rational& delta) {
  REQUIRE(r.outcome == Outcome::Interval);
  CHECK(r.low <= r.high);
  CHECK(r.high - r.low <= delta);
  CHECK(r.warnings.empty());
  REQUIRE(r.stats.counted_bound);
  CHECK(r.stats.sat_checks <= *r.stats.counted_bound);
  REQUIRE(r.witness);
  CHECK(r.witness->residual <= kResidualTolerance);
}

ConstrainedBN one_var(const std::string& constraints) {
  return load_model(R"({"nodes": [{"name": "A", "states": ["a", "b"], "table": {"|a": "x", "|b": "1 - x"}}],
    "variables": {"x": ["x"]}, "constraints": [)" + constraints + "]}");
}

}  // namespace

TEST_CASE("sup and inf of grass-wet marginals") {
  ConstrainedBN b = cbn::testing::bundled("grass_wet.json");
  ConstrainedBN plain = load_model_file(cbn::testing::data_path("grass_wet.json"));
  SmtLibSolver solver;

  std::vector<Rational> w = grid_values(plain, plain.marginal_defs.at("mp_W"), q(1, 10), q(3, 10), 200);
  std::vector<Rational> h = grid_values(plain, plain.marginal_defs.at("mp_H"), q(1, 10), q(3, 10), 200);
  // Both marginals increase along the grid: extremes sit at the endpoints.
  CHECK(std::is_sorted(w.begin(), w.end()));
  CHECK(std::is_sorted(h.begin(), h.end()));

  Rational delta(1, 1000000000);
  IntervalResult sw = sup(Term::var("mp_W"), delta, b, solver, checked());
  check_run(sw, delta);
  CHECK(sw.low <= w.back());
  CHECK(w.back() <= sw.high);
  CHECK(sw.stats.algorithm == "sup");
  CHECK(*sw.witness_value >= sw.low - kResidualTolerance);
  CHECK(abs(sw.witness->values.at("x") - q(3, 10)) < q(1, 1000000));

  Rational coarse(1, 1000000);
  IntervalResult sh = sup(Term::var("mp_H"), coarse, b, solver, checked());
  check_run(sh, coarse);
  CHECK(sh.low <= q(35255, 100000));
  CHECK(q(35255, 100000) <= sh.high);

  IntervalResult ih = inf(Term::var("mp_H"), coarse, b, solver, checked());
  check_run(ih, coarse);
  CHECK(ih.low <= q(15695, 100000));
  CHECK(q(15695, 100000) <= ih.high);
  CHECK(ih.stats.algorithm == "inf");

  IntervalResult star = inf_star(Term::var("mp_H"), coarse, b, solver, checked());
  check_run(star, coarse);
  CHECK(star.low <= q(15695, 100000));
  CHECK(q(15695, 100000) <= star.high);
  CHECK(*star.witness_value <= star.high + kResidualTolerance);
}

TEST_CASE("constant terms") {
  ConstrainedBN b = cbn::testing::bundled("grass_wet.json");
  SmtLibSolver solver;
  Rational delta(1, 1000);
  for (const char* c : {"0.25", "3", "0.001"}) {
    Rational v = parse_term(c).value();
    IntervalResult s = sup(parse_term(c), delta, b, solver, checked());
    check_run(s, delta);
    CHECK(s.low <= v);
    CHECK(v <= s.high);
    IntervalResult i = inf(parse_term(c), delta, b, solver, checked());
    REQUIRE(i.outcome == Outcome::Interval);
    CHECK(i.low <= v);
    CHECK(v <= i.high);
  }
}

TEST_CASE("inf returns early near zero") {
  ConstrainedBN b = one_var(R"("0 < x", "x <= 1")");
  SmtLibSolver solver;
  Rational delta(1, 1000);
  IntervalResult r = inf(Term::var("x"), delta, b, solver, checked());
  REQUIRE(r.outcome == Outcome::Interval);
  CHECK(r.low == 0);
  CHECK(r.high <= delta);
  CHECK(r.high > 0);
  REQUIRE(r.stats.counted_bound);
  CHECK(r.stats.sat_checks <= *r.stats.counted_bound);
  CHECK(std::isinf(*r.stats.bound));
}

TEST_CASE("starred dispatch") {
  SmtLibSolver solver;
  Rational delta(1, 10000);

  ConstrainedBN zero = one_var(R"("x <= 0.5", "0 <= x")");
  IntervalResult z = sup_star(parse_term("0 - x"), delta, zero, solver);
  CHECK(z.outcome == Outcome::ZeroExtremum);
  CHECK(*z.witness_value == 0);
  CHECK(inf_star(Term::var("x"), delta, zero, solver).outcome == Outcome::ZeroExtremum);

  ConstrainedBN broken = one_var(R"("x < 0", "x > 1")");
  CHECK(sup_star(Term::var("x"), delta, broken, solver).outcome == Outcome::Inconsistent);
  CHECK(inf_star(Term::var("x"), delta, broken, solver).outcome == Outcome::Inconsistent);

  ConstrainedBN negative = one_var(R"("0.2 <= x", "x <= 0.6")");
  IntervalResult n = sup_star(parse_term("x - 1"), delta, negative, solver, checked());
  REQUIRE(n.outcome == Outcome::Interval);
  CHECK(n.low <= q(-2, 5));
  CHECK(q(-2, 5) <= n.high);
  CHECK(n.high - n.low <= delta);
  CHECK(n.stats.algorithm == "inf");
  CHECK(*n.witness_value >= n.low - kResidualTolerance);

  // inf*(t) mirrors sup*(-t).
  IntervalResult a = inf_star(parse_term("x - 1"), delta, negative, solver);
  IntervalResult m = sup_star(parse_term("1 - x"), delta, negative, solver);
  REQUIRE(a.outcome == Outcome::Interval);
  REQUIRE(m.outcome == Outcome::Interval);
  CHECK(a.low == -m.high);
  CHECK(a.high == -m.low);

  // sup falls back to the starred semantics when t > 0 is unsatisfiable.
  CHECK(sup(parse_term("0 - x"), delta, zero, solver).outcome == Outcome::ZeroExtremum);
  CHECK_THROWS_AS(sup(Term::var("w"), delta, zero, solver), ModelError);
  CHECK_THROWS_AS(sup(Term::var("x"), 0, zero, solver), std::invalid_argument);
}

TEST_CASE("unknown verdicts abort") {
  SolverConfig missing;
  missing.command = "/nonexistent/solver";
  SmtLibSolver solver(missing);
  IntervalResult r = sup_star(Term::var("x"), q(1, 100), one_var(R"("0 <= x", "x <= 1")"), solver);
  CHECK(r.outcome == Outcome::Aborted);
  CHECK_FALSE(r.reason.empty());
}

TEST_CASE("brackets contain grid extremes on random one-variable models") {
  SmtLibSolver solver;
  Rational delta(1, 1000000);
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    CAPTURE(seed);
    GeneratedModel g = generate_random(seed, {.nodes = 2 + seed % 3, .x_vars = 1, .min_states = 2, .max_states = 3, .max_parents = 2});
    MarginalDefinition d = symbolic_marginal(g.model, g.suggested, g.marginal_name);
    ConstrainedBN b = g.model;
    ensure_marginal_definitions(b);

    Rational best_max = -1, best_min = 2;
    for (long i = 0; i <= 10000; ++i) {
      Assignment a{{"x1", Rational(i, 10000)}};
      a["x1"].canonicalize();
      Rational den = d.denominator.evaluate(a);
      if (den == 0) continue;
      Rational v = d.numerator.evaluate(a) / den;
      if (v > best_max) best_max = v;
      if (v < best_min) best_min = v;
    }
    Term mp = Term::var(g.marginal_name);
    IntervalResult s = sup_star(mp, delta, b, solver, checked());
    IntervalResult i = inf_star(mp, delta, b, solver, checked());
    REQUIRE(s.outcome != Outcome::Aborted);
    REQUIRE(i.outcome != Outcome::Aborted);
    if (s.outcome == Outcome::Interval) {
      CHECK(best_max <= s.high);
      CHECK(s.low <= best_max + q(1, 1000));
      CHECK(s.warnings.empty());
      CHECK(s.stats.sat_checks <= *s.stats.counted_bound);
    } else {
      CHECK(best_max == 0);
    }
    if (i.outcome == Outcome::Interval) {
      CHECK(i.low <= best_min);
      CHECK(best_min <= i.high + q(1, 1000));
      CHECK(i.warnings.empty());
      CHECK(i.stats.sat_checks <= *i.stats.counted_bound);
    } else {
      CHECK(best_min == 0);
    }
  }
}

TEST_CASE("published check-count formulas") {
  CHECK(sup_check_bound(q(1), q(1), q(1, 8)) == 4);
  CHECK(inf_check_bound(q(1), q(1, 8), q(1, 2)) == 4);
  CHECK(std::isinf(inf_check_bound(q(1), q(1, 8), q(0))));
  CHECK(sup_counted_bound(q(1), q(1, 2), q(1, 8)) == 6);
  CHECK(inf_counted_bound(q(1), q(1, 8)) == 5);
}
