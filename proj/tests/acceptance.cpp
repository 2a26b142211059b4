// One PASS/FAIL line per acceptance criterion. Exit status is nonzero only
// when the suite cannot run; failing criteria are reported, not hidden.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "cbn/compose.hpp"
#include "cbn/generate.hpp"
#include "cbn/inference.hpp"
#include "cbn/logic.hpp"
#include "cbn/optimize.hpp"
#include "cbn/sensitivity.hpp"
#include "commands.hpp"
#include "report.hpp"

using namespace cbn;

namespace {

using Clock = std::chrono::steady_clock;

const char* kMpH =
    "0.495*x*x + 0.5*x*(-0.95*x + 0.95) + 0.7*x*(-0.5*x + 1) + 1.0*(-0.5*x + 1)*(-0.05*x + 0.05)";
const char* kMpWDen =
    "0.35*x*x + 0.025*x*(-0.95*x + 0.95) + 0.7*x*(-x*0.5 + 1) + 0.025*x*(-0.05*x + 0.05) + "
    "0.05*(-0.95*x + 0.95)*(-x*0.5 + 1) + 0.05*(-x*0.5 + 1)*(-0.05*x + 0.05)";
const char* kMpWNum =
    "0.3465*x*x + 0.025*x*(-0.95*x + 0.95) + 0.49*x*(-x*0.5 + 1) + 0.05*(-x*0.5 + 1)*(-0.05*x + 0.05)";

struct Line {
  int id;
  std::string title;
  bool pass = false;
  double seconds = 0;
  std::vector<std::string> details;
};

std::vector<Line> g_lines;

const OptimizeOptions kChecked{.check_invariants = true};

Rational dec(const char* text) { return parse_decimal(text); }

std::string show(const Rational& r) { return to_decimal(r, 12); }

std::string data(const std::string& file) { return std::string(CBN_DATA_DIR) + "/" + file; }

ConstrainedBN bundled(const std::string& file) {
  auto b = load_model_file(data(file));
  ensure_marginal_definitions(b);
  return b;
}

Polynomial expand(const char* text) { return to_rational_fn(parse_term(text)).num(); }

Rational enumerate_marginal(const ConstrainedBN& b, const MarginalSpec& spec, const Assignment& a) {
  return query_joint(enumerate_joint(concretize(b, a)), spec);
}

/// True iff [low, high] holds a point within tol of v.
bool brackets_near(const IntervalResult& r, const Rational& v, const Rational& tol) {
  return r.outcome == Outcome::Interval && r.low - tol <= v && v <= r.high + tol;
}

std::string interval_text(const IntervalResult& r) {
  std::ostringstream s;
  s << to_string(r.outcome) << " [" << show(r.low) << ", " << show(r.high) << "] via " << r.stats.algorithm
    << ", sat_checks " << r.stats.sat_checks;
  for (const auto& w : r.warnings) s << "; warning: " << w;
  return s.str();
}

void criterion(int id, const std::string& title, const std::function<void(Line&)>& body) {
  Line line{id, title};
  auto start = Clock::now();
  try {
    body(line);
  } catch (const std::exception& e) {
    line.pass = false;
    line.details.push_back(std::string("exception: ") + e.what());
  }
  line.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  std::cout << (line.pass ? "[PASS] " : "[FAIL] ") << std::setw(2) << id << "  " << title << "  ("
            << std::fixed << std::setprecision(3) << line.seconds << " s)\n";
  std::cout.unsetf(std::ios::fixed);
  for (const auto& d : line.details) std::cout << "         " << d << "\n";
  std::cout.flush();
  g_lines.push_back(line);
}

/// Grass-wet joined with its three-state rain variant through 2z = x.
ConstrainedBN composed(const std::vector<std::string>& extra_links) {
  UnionRecipe recipe{bundled("grass_wet.json"), bundled("grass_wet_rain3.json")};
  recipe.policy = RenamePolicy::AutoSuffix;
  recipe.links = {parse_constraint("2*z = x"), parse_constraint("diff = mp_W - mp_W2")};
  for (const auto& l : extra_links) recipe.links.push_back(parse_constraint(l));
  return constrained_union(recipe).model;
}

/// Bound runs of criteria 5-7, kept for the check-count criterion.
struct BoundRun {
  std::string label;
  IntervalResult result;
  Rational delta;
};
std::vector<BoundRun> g_runs;

/// Maximizes or minimizes f over [lo, hi] by a grid followed by two finer
/// grids around the best point; endpoints are always sampled.
Rational grid_extreme(const std::function<Rational(const Rational&)>& f, const Rational& lo, const Rational& hi,
                      bool maximize, long steps = 2000) {
  Rational best_x = lo;
  Rational best = f(lo);
  auto consider = [&](const Rational& x) {
    if (x < lo || x > hi) return;
    Rational v = f(x);
    if (maximize ? v > best : v < best) best = v, best_x = x;
  };
  Rational a = lo, b = hi;
  for (int level = 0; level < 3; ++level) {
    Rational step = (b - a) / steps;
    for (long i = 0; i <= steps; ++i) consider(a + step * i);
    a = best_x - step;
    b = best_x + step;
  }
  return best;
}

/// Extreme of a partial function over the box x in [0.1, 0.3], y in [0.02, 0.06]
/// by repeated zooming grids around the best feasible point.
std::optional<Rational> zoom_extreme(
    const std::function<std::optional<Rational>(const Rational&, const Rational&)>& f, bool maximize) {
  const Rational x_lo = parse_decimal("0.1"), x_hi = parse_decimal("0.3");
  const Rational y_lo = parse_decimal("0.02"), y_hi = parse_decimal("0.06");
  Rational ax = x_lo, bx = x_hi, ay = y_lo, by = y_hi;
  std::optional<Rational> best;
  Rational best_x, best_y;
  const long n = 40;
  for (int level = 0; level < 5; ++level) {
    Rational sx = (bx - ax) / n, sy = (by - ay) / n;
    for (long i = 0; i <= n; ++i)
      for (long j = 0; j <= n; ++j) {
        Rational x = ax + sx * i, y = ay + sy * j;
        if (x < x_lo || x > x_hi || y < y_lo || y > y_hi) continue;
        auto v = f(x, y);
        if (v && (!best || (maximize ? *v > *best : *v < *best))) best = v, best_x = x, best_y = y;
      }
    if (!best) return std::nullopt;
    ax = best_x - 2 * sx, bx = best_x + 2 * sx;
    ay = best_y - 2 * sy, by = best_y + 2 * sy;
  }
  return best;
}

// ---------------------------------------------------------------------------

void c1() {
  criterion(1, "unconditional marginal mp_H equals the printed polynomial", [](Line& l) {
    auto b = bundled("grass_wet.json");
    auto start = Clock::now();
    auto def = symbolic_marginal(b, b.marginal_defs.at("mp_H"), "mp_H");
    double s = std::chrono::duration<double>(Clock::now() - start).count();
    auto expected = expand(kMpH);
    l.details.push_back("N = " + to_string(def.numerator) + ", D = " + to_string(def.denominator));
    l.details.push_back("printed form expands to " + to_string(expected));
    l.pass = def.numerator == expected && def.denominator == Polynomial(Rational(1)) && s < 1;
  });
}

void c2() {
  criterion(2, "conditional marginal mp_W: N and D equal the printed sides", [](Line& l) {
    auto b = bundled("grass_wet.json");
    auto start = Clock::now();
    auto def = symbolic_marginal(b, b.marginal_defs.at("mp_W"), "mp_W");
    double s = std::chrono::duration<double>(Clock::now() - start).count();
    auto num = expand(kMpWNum), den = expand(kMpWDen);
    // common scaling from the constant terms, then checked on every coefficient
    Rational k = def.denominator.coefficient({}) / den.coefficient({});
    l.details.push_back("N = " + to_string(def.numerator) + ", D = " + to_string(def.denominator));
    l.details.push_back("printed sides expand to N' = " + to_string(num) + ", D' = " + to_string(den));
    l.details.push_back("common scaling N/N' = D/D' = " + to_string(k));
    l.pass = k != 0 && def.numerator == num * k && def.denominator == den * k && s < 1;
  });
}

void c3() {
  criterion(3, "point values of mp_H at x = 0.3 and x = 0.1", [](Line& l) {
    auto printed = expand(kMpH);
    auto b = bundled("grass_wet.json");
    auto ours = symbolic_marginal(b, b.marginal_defs.at("mp_H"), "mp_H").numerator;
    bool ok = true;
    for (auto [x, v] : {std::pair{"0.3", "0.35255"}, std::pair{"0.1", "0.15695"}}) {
      Assignment a{{"x", dec(x)}};
      l.details.push_back(std::string("x = ") + x + ": printed " + to_string(printed.evaluate(a)) + ", ours " +
                          to_string(ours.evaluate(a)) + ", expected " + v);
      ok = ok && printed.evaluate(a) == dec(v) && ours.evaluate(a) == dec(v);
    }
    l.pass = ok;
  });
}

void c4() {
  criterion(4, "must(mp_H < 0.3) fails and may(mp_H < 0.3) holds with exact witnesses", [](Line& l) {
    auto b = bundled("grass_wet.json");
    SmtLibSolver solver;
    auto phi = parse_constraint("mp_H < 0.3");
    auto exact_h = [](const Witness& w) { return expand(kMpH).evaluate({{"x", w.values.at("x")}}); };

    auto t0 = Clock::now();
    auto must = judge_must(b, phi, solver);
    double s_must = std::chrono::duration<double>(Clock::now() - t0).count();
    auto t1 = Clock::now();
    auto may = judge_may(b, phi, solver);
    double s_may = std::chrono::duration<double>(Clock::now() - t1).count();

    bool ok = must.truth == Truth::Fails && must.witness && may.truth == Truth::Holds && may.witness;
    if (must.witness) {
      auto h = exact_h(*must.witness);
      l.details.push_back("counterexample x = " + show(must.witness->values.at("x")) + ", exact mp_H = " + show(h));
      ok = ok && h >= dec("0.3");
    }
    if (may.witness) {
      auto h = exact_h(*may.witness);
      l.details.push_back("witness x = " + show(may.witness->values.at("x")) + ", exact mp_H = " + show(h));
      ok = ok && h < dec("0.3");
    }
    l.details.push_back("solver time " + std::to_string(s_must) + " s and " + std::to_string(s_may) + " s");
    l.pass = ok && s_must < 30 && s_may < 30;
  });
}

void c5() {
  criterion(5, "Sup(mp_W, 1e-9) on grass-wet", [](Line& l) {
    auto b = bundled("grass_wet.json");
    SmtLibSolver solver;
    Rational delta = dec("1e-9");
    auto r = sup(parse_term("mp_W"), delta, b, solver, kChecked);
    g_runs.push_back({"Sup(mp_W)", r, delta});
    Rational mid = (r.low + r.high) / 2;
    Rational target = dec("0.663714287");
    l.details.push_back(interval_text(r));
    l.details.push_back("width " + to_decimal(r.high - r.low, 6) + ", midpoint " + to_decimal(mid, 15) +
                        ", distance to 0.663714287: " + to_decimal(abs(mid - target), 6));
    l.pass = r.outcome == Outcome::Interval && r.high - r.low <= delta && abs(mid - target) <= dec("1e-7");
  });
}

void c6() {
  criterion(6, "composition: Sup*/Inf* of diff = mp_W - mp_W2", [](Line& l) {
    auto u = composed({});
    SmtLibSolver solver;
    Rational delta = dec("1e-9");
    auto hi = sup_star(parse_term("diff"), delta, u, solver, kChecked);
    auto lo = inf_star(parse_term("diff"), delta, u, solver, kChecked);
    g_runs.push_back({"Sup*(diff)", hi, delta});
    g_runs.push_back({"Inf*(diff)", lo, delta});
    l.details.push_back("sup: " + interval_text(hi) + ", expected near 0.13407950");
    l.details.push_back("inf: " + interval_text(lo) + ", expected near -0.16427222");
    l.pass = brackets_near(hi, dec("0.13407950"), dec("1e-6")) && brackets_near(lo, dec("-0.16427222"), dec("1e-6"));
  });
}

void c7() {
  criterion(7, "tightened composition 0.1 <= x <= 0.2: Sup*(diff) via t < 0 near -0.05521950", [](Line& l) {
    auto u = composed({"0.1 <= x", "x <= 0.2"});
    SmtLibSolver solver;
    Rational delta = dec("1e-9");
    auto r = sup_star(parse_term("diff"), delta, u, solver, kChecked);
    g_runs.push_back({"Sup*(diff), tightened", r, delta});
    bool negative_branch = r.stats.algorithm == "inf" && r.high <= 0;
    l.details.push_back(interval_text(r));
    l.pass = negative_branch && brackets_near(r, dec("-0.05521950"), dec("1e-6"));
    if (!l.pass) {
      // Independent grid over the feasible box: x in [0.1, 0.2], 5y in [0.1, 0.3], z = x/2.
      auto b0 = bundled("grass_wet.json");
      auto b1 = bundled("grass_wet_rain3.json");
      auto w = b0.marginal_defs.at("mp_W");
      auto w2 = b1.marginal_defs.at("mp_W2");
      Rational best = -10;
      Assignment at;
      for (long i = 0; i <= 20; ++i)
        for (long j = 0; j <= 20; ++j) {
          Rational x = dec("0.1") + Rational(i, 200), y = dec("0.02") + Rational(j, 500);
          x.canonicalize(), y.canonicalize();
          Rational z = x / 2;
          Rational d = enumerate_marginal(b0, w, {{"x", x}}) - enumerate_marginal(b1, w2, {{"y", y}, {"z", z}});
          if (d > best) best = d, at = {{"x", x}, {"y", y}};
        }
      l.details.push_back("grid oracle: max diff = " + show(best) + " at x = " + show(at["x"]) + ", y = " +
                          show(at["y"]) + " (positive, so the t > 0 branch is correct here)");
      auto pinned = composed({"0.1 <= x", "x <= 0.2", "5*y = 0.3"});
      auto p = sup_star(parse_term("diff"), delta, pinned, solver, kChecked);
      l.details.push_back("with y pinned to 0.06 as well: " + interval_text(p));
      l.details.push_back("the published value is diff at x = 0.2, y = 0.06, z = 0.1; not attainable as stated");
    }
  });
}

std::vector<std::string> random_assignments_note;

void c8() {
  criterion(8, "oracle equivalence: 200 random models x 5 assignments", [](Line& l) {
    SplitMix64 rng(8);
    std::size_t checked = 0, mismatches = 0, models = 0;
    for (std::uint64_t seed = 1; models < 200; ++seed) {
      GeneratorOptions o;
      o.nodes = rng.uniform(1, 6);
      o.x_vars = rng.uniform(0, 2);
      o.min_states = 1;
      o.max_states = 3;
      o.max_parents = 2;
      auto g = generate_random(seed, o);
      ++models;
      auto def = symbolic_marginal(g.model, g.suggested, g.marginal_name);
      for (int k = 0; k < 5; ++k) {
        Assignment a;
        for (const auto& v : g.model.x_vars) a[v] = Rational(static_cast<long>(rng.uniform(0, 1000)), 1000);
        for (auto& [name, value] : a) value.canonicalize();
        // only assignments satisfying C with positive evidence probability
        bool ok = std::all_of(g.model.constraints.begin(), g.model.constraints.end(),
                              [&](const Constraint& c) { return holds(c, a); });
        if (!ok || def.denominator.evaluate(a) <= 0) {
          --k;
          continue;
        }
        ++checked;
        if (def.numerator.evaluate(a) / def.denominator.evaluate(a) != enumerate_marginal(g.model, g.suggested, a))
          ++mismatches;
      }
    }
    l.details.push_back(std::to_string(models) + " models, " + std::to_string(checked) + " assignments, " +
                        std::to_string(mismatches) + " mismatches");
    l.pass = models == 200 && checked == 1000 && mismatches == 0;
  });
}

void c9() {
  criterion(9, "duality and consistency characterization on 100 pairs; 20 vacuous musts", [](Line& l) {
    SmtLibSolver solver;
    SplitMix64 rng(9);
    std::size_t pairs = 0, violations = 0, unknown = 0, inconsistent_pairs = 0;
    auto truth = [&](const Judgment& j) {
      if (j.truth == Truth::Unknown) ++unknown;
      return j.truth == Truth::Holds;
    };
    for (std::uint64_t seed = 1; pairs < 100; ++seed) {
      auto g = generate_random(seed, {.nodes = 1 + seed % 4, .x_vars = 2, .min_states = 1, .max_states = 3,
                                      .max_parents = 2});
      auto b = g.model;
      ensure_marginal_definitions(b);
      if (seed % 4 == 0) b.constraints.push_back(random_constraint(rng, b.variables(), 2));
      auto vars = b.variables();
      auto phi = random_constraint(rng, vars, 3);
      auto psi = random_constraint(rng, vars, 2);
      auto neg = Constraint::negate(phi);
      ++pairs;
      // duality and distribution
      bool d1 = truth(judge_must(b, phi, solver)) == !truth(judge_may(b, neg, solver));
      bool d2 = truth(judge_may(b, phi, solver)) == !truth(judge_must(b, neg, solver));
      bool d3 = truth(judge_must(b, Constraint::conj(phi, psi), solver)) ==
                (truth(judge_must(b, phi, solver)) && truth(judge_must(b, psi, solver)));
      bool d4 = truth(judge_may(b, Constraint::disj(phi, psi), solver)) ==
                (truth(judge_may(b, phi, solver)) || truth(judge_may(b, psi, solver)));
      // the five characterizations agree
      auto verdict = check_consistent(b, solver);
      if (verdict.status == SatStatus::Unknown) ++unknown;
      bool consistent = verdict.status == SatStatus::Sat;
      if (!consistent) ++inconsistent_pairs;
      bool k1 = truth(judge_may(b, Constraint::truth(), solver));
      bool k3 = !truth(judge_must(b, phi, solver)) || truth(judge_may(b, phi, solver));
      bool k4 = truth(judge_may(b, Constraint::disj(phi, neg), solver));
      bool k5 = !truth(judge_must(b, Constraint::conj(phi, neg), solver));
      bool chars = k1 == consistent && k3 == consistent && k4 == consistent && k5 == consistent;
      if (!(d1 && d2 && d3 && d4 && chars)) ++violations;
    }
    std::size_t vacuous_ok = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      auto g = generate_random(seed, {.nodes = 1 + seed % 4, .x_vars = 2, .min_states = 1, .max_states = 3,
                                      .max_parents = 2});
      auto b = g.model;
      ensure_marginal_definitions(b);
      b.constraints.push_back(parse_constraint("x1 > 1"));
      auto phi = random_constraint(rng, b.variables(), 3);
      auto j = judge_must(b, phi, solver);
      if (j.truth == Truth::Holds && j.warnings == std::vector<std::string>{kVacuousWarning}) ++vacuous_ok;
    }
    l.details.push_back(std::to_string(pairs) + " pairs (" + std::to_string(inconsistent_pairs) +
                        " on inconsistent models), " + std::to_string(violations) + " violations, " +
                        std::to_string(unknown) + " unknown verdicts");
    l.details.push_back(std::to_string(vacuous_ok) + "/20 inconsistent models flag the vacuous must");
    l.pass = violations == 0 && unknown == 0 && vacuous_ok == 20;
  });
}

void c10() {
  criterion(10, "check counts within the published bounds for the runs of 5-7", [](Line& l) {
    bool ok = !g_runs.empty();
    for (const auto& run : g_runs) {
      const auto& r = run.result;
      if (!r.stats.initial_cache || r.outcome != Outcome::Interval) {
        l.details.push_back(run.label + ": no bracket, bound not applicable");
        ok = false;
        continue;
      }
      Rational c = *r.stats.initial_cache;
      // Brackets of starred runs may be negated; the inner run saw |t|. The
      // most generous reading takes sup as the far end and inf as the near end.
      Rational near = std::min(abs(r.low), abs(r.high)), far = std::max(abs(r.low), abs(r.high));
      bool is_sup = r.stats.algorithm == "sup";
      double bound = is_sup ? sup_check_bound(far, c, run.delta) : inf_check_bound(c, run.delta, near);
      double counted = is_sup ? sup_counted_bound(far, c, run.delta) : inf_counted_bound(c, run.delta);
      bool within = static_cast<double>(r.stats.sat_checks) <= bound;
      ok = ok && within;
      std::ostringstream s;
      s << run.label << ": " << r.stats.algorithm << " run, c = " << to_decimal(c, 10) << ", sat_checks "
        << r.stats.sat_checks << ", published bound " << bound << (within ? "" : " EXCEEDED")
        << ", bound counting the initial and guard checks " << counted;
      l.details.push_back(s.str());
    }
    l.pass = ok;
  });
}

void c11() {
  criterion(11, "case-study workflows on bundled models against grid oracles", [](Line& l) {
    SmtLibSolver solver;
    Rational delta = dec("1e-9"), tol = dec("1e-6");
    bool ok = true;

    // installed marginal, then Sup*/Inf*
    {
      auto b = bundled("grass_wet.json");
      MarginalSpec spec{"Rain", "T", {{"HolmesWet", "T"}}};
      auto with = install_marginal(b, spec, "mp_R");
      auto hi = sup_star(parse_term("mp_R"), delta, with, solver, kChecked);
      auto lo = inf_star(parse_term("mp_R"), delta, with, solver, kChecked);
      auto f = [&](const Rational& x) { return enumerate_marginal(b, spec, {{"x", x}}); };
      auto ghi = grid_extreme(f, dec("0.1"), dec("0.3"), true);
      auto glo = grid_extreme(f, dec("0.1"), dec("0.3"), false);
      bool pass = brackets_near(hi, ghi, tol) && brackets_near(lo, glo, tol);
      ok = ok && pass;
      l.details.push_back(std::string(pass ? "ok" : "MISMATCH") + " p(Rain=T | HolmesWet=T): sup " + interval_text(hi) +
                          " vs grid " + show(ghi) + "; inf " + interval_text(lo) + " vs grid " + show(glo));
    }

    // threshold agreement between the composed models
    {
      UnionRecipe recipe{bundled("grass_wet.json"), bundled("grass_wet_rain3.json")};
      recipe.policy = RenamePolicy::AutoSuffix;
      recipe.links = {parse_constraint("2*z = x"), parse_constraint("0 < th"), parse_constraint("th < 1")};
      auto u = constrained_union(recipe).model;
      auto phi1 = parse_constraint("th < mp_H & mp_H2 <= th");
      auto phi2 = parse_constraint("th < mp_H2 & mp_H <= th");
      auto same = parse_constraint("!((th < mp_H & mp_H2 <= th) | (th < mp_H2 & mp_H <= th))");
      auto must_same = judge_must(u, same, solver);

      auto b0 = bundled("grass_wet.json");
      auto b1 = bundled("grass_wet_rain3.json");
      auto h = b0.marginal_defs.at("mp_H");
      auto h2 = b1.marginal_defs.at("mp_H2");
      auto mp_h = [&](const Rational& x) { return enumerate_marginal(b0, h, {{"x", x}}); };
      auto mp_h2 = [&](const Rational& x, const Rational& y) {
        return enumerate_marginal(b1, h2, {{"y", y}, {"z", x / 2}});
      };
      bool any_differ = false;
      for (int which = 1; which <= 2; ++which) {
        auto phi = which == 1 ? phi1 : phi2;
        auto may = judge_may(u, phi, solver);
        // th ranges over [low, high) with low the smaller and high the larger marginal
        auto range = [&](const Rational& x, const Rational& y) -> std::optional<std::pair<Rational, Rational>> {
          Rational a = mp_h(x), c = mp_h2(x, y);
          Rational low = which == 1 ? c : a, high = which == 1 ? a : c;
          if (!(low < high)) return std::nullopt;
          return std::pair{low, high};
        };
        auto gsup = zoom_extreme([&](auto x, auto y) { auto r = range(x, y); return r ? std::optional(r->second) : std::nullopt; }, true);
        auto ginf = zoom_extreme([&](auto x, auto y) { auto r = range(x, y); return r ? std::optional(r->first) : std::nullopt; }, false);
        bool grid_sat = gsup.has_value();
        std::string label = "phi" + std::to_string(which);
        if ((may.truth == Truth::Holds) != grid_sat) {
          ok = false;
          l.details.push_back("MISMATCH may " + label + ": solver " + to_string(may.truth) + ", grid " +
                              (grid_sat ? "sat" : "unsat"));
          continue;
        }
        if (!grid_sat) {
          l.details.push_back("ok may " + label + " fails, as on the grid");
          continue;
        }
        any_differ = true;
        auto with = u;
        with.constraints.push_back(phi);
        auto hi = sup_star(parse_term("th"), dec("1e-8"), with, solver, kChecked);
        auto lo = inf_star(parse_term("th"), dec("1e-8"), with, solver, kChecked);
        bool pass = brackets_near(hi, *gsup, tol) && brackets_near(lo, *ginf, tol);
        ok = ok && pass;
        l.details.push_back(std::string(pass ? "ok" : "MISMATCH") + " th under " + label + ": sup " + interval_text(hi) +
                            " vs grid " + show(*gsup) + "; inf " + interval_text(lo) + " vs grid " + show(*ginf));
      }
      bool must_ok = (must_same.truth == Truth::Holds) == !any_differ;
      ok = ok && must_ok;
      l.details.push_back(std::string(must_ok ? "ok" : "MISMATCH") + " must(same decision) " + to_string(must_same.truth));
    }

    // sensitivity closed form, then bounds
    {
      auto b = bundled("sensitivity_toy.json");
      SensitivitySpec spec{"AuthCapability", "Low", "TamperFound", "Yes"};
      auto s = sensitivity_value(b, spec, "s", &solver);
      auto hi = sup_star(parse_term("s"), delta, s.model, solver, kChecked);
      auto lo = inf_star(parse_term("s"), delta, s.model, solver, kChecked);
      auto f = [&](const Rational& x) {
        auto joint = enumerate_joint(concretize(b, {{"x", x}}));
        auto po = query_joint(joint, {"AuthCapability", "Low", {}});
        auto px = query_joint(joint, {"TamperFound", "Yes", {}});
        auto pox = query_joint(joint, {"AuthCapability", "Low", {{"TamperFound", "Yes"}}});
        auto pxo = query_joint(joint, {"TamperFound", "Yes", {{"AuthCapability", "Low"}}});
        return sensitivity_formula(po, px, pox, pxo);
      };
      auto ghi = grid_extreme(f, dec("0.1"), dec("0.5"), true, 400);
      auto glo = grid_extreme(f, dec("0.1"), dec("0.5"), false, 400);
      bool pass = brackets_near(hi, ghi, tol) && brackets_near(lo, glo, tol);
      ok = ok && pass;
      l.details.push_back(std::string(pass ? "ok" : "MISMATCH") + " sensitivity: sup " + interval_text(hi) +
                          " vs grid " + show(ghi) + "; inf " + interval_text(lo) + " vs grid " + show(glo));
    }
    l.pass = ok;
  });
}

void c12() {
  criterion(12, "stress harness: 100 generated models, CSV, bucket medians", [](Line& l) {
    auto csv = std::filesystem::temp_directory_path() / "cbn_acceptance_stress.csv";
    unsigned jobs = std::max(1u, std::min(4u, std::thread::hardware_concurrency()));
    std::ostringstream out, err;
    int code = cli::run({"--seed", "0", "stress", "--models", "100", "--jobs", std::to_string(jobs), "--csv",
                         csv.string()},
                        out, err);
    auto report = cli::Json::parse(out.str());
    std::ifstream f(csv);
    std::string header;
    std::getline(f, header);
    std::size_t rows = 0;
    for (std::string line; std::getline(f, line);) ++rows;
    l.details.push_back("exit " + std::to_string(code) + ", " + std::to_string(rows) + " CSV rows, csv " + csv.string());
    for (const auto& [bucket, m] : report["result"]["bucket_medians"].items())
      l.details.push_back("nodes " + bucket + ": " + std::to_string(m["models"].get<int>()) + " models, median " +
                          std::to_string(m["median_seconds"].get<double>()) + " s");
    bool monotone = report["result"]["median_nondecreasing"].get<bool>();
    l.details.push_back(monotone ? "medians nondecreasing across buckets"
                                 : "deviation reported: medians not nondecreasing");
    for (const auto& w : report["warnings"]) l.details.push_back("warning: " + w.get<std::string>());
    l.pass = code == 0 && rows == 100 && header == "nodes,x_vars,total_states,marginal_len,seconds";
  });
}

}  // namespace

int main() {
  try {
    c1();
    c2();
    c3();
    c4();
    c5();
    c6();
    c7();
    c8();
    c9();
    c10();
    c11();
    c12();
  } catch (const std::exception& e) {
    std::cerr << "acceptance suite aborted: " << e.what() << "\n";
    return 2;
  }
  std::size_t passed = std::count_if(g_lines.begin(), g_lines.end(), [](const Line& l) { return l.pass; });
  std::cout << passed << "/" << g_lines.size() << " criteria passed\n";
  return 0;
}
