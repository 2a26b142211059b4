#include "cbn/optimize.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "cbn/logic.hpp"

namespace cbn {

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Interval: return "interval";
    case Outcome::ZeroExtremum: return "zero";
    case Outcome::Inconsistent: return "inconsistent";
    case Outcome::Aborted: return "aborted";
  }
  return "aborted";
}

double sup_check_bound(const Rational& sup, const Rational& c, const Rational& delta) {
  return std::floor(2 * std::log2(to_double(sup)) - std::log2(to_double(c)) - std::log2(to_double(delta)) + 1);
}

double inf_check_bound(const Rational& c, const Rational& delta, const Rational& inf) {
  Rational m = inf < delta ? inf : delta;
  if (m <= 0) return std::numeric_limits<double>::infinity();
  return 1 + std::floor(2 * std::log2(to_double(c)) - std::log2(to_double(m)));
}

double sup_counted_bound(const Rational& sup, const Rational& c, const Rational& delta) {
  return 2 + std::floor(std::log2(to_double(sup / c))) + std::ceil(std::log2(to_double(sup / delta)));
}

double inf_counted_bound(const Rational& c, const Rational& delta) {
  return 2 + std::ceil(std::log2(to_double(c / delta)));
}

namespace {

enum class Op { Gt, Geq, Eq, Leq, Lt };

class Aborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Probe {
  bool sat = false;
  std::optional<Witness> witness;
  Rational value = 0;  // exact t at the witness
};

/// Memoized may-checks of `t op r` against one model. One instance spans a
/// whole starred run so that repeated formulas reach the oracle once.
class Prober {
 public:
  Prober(const ConstrainedBN& b, DecisionProcedure& oracle) : b_(b), oracle_(oracle) {}

  /// Counted against `tally` when the formula is new to that tally.
  Probe check(const Term& t, Op op, const Rational& r, std::set<std::string>& tally, std::size_t& count) {
    Constraint c = make(t, op, r);
    std::string key = to_string(c);
    if (tally.insert(key).second) ++count;
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    ++calls_;
    Judgment j = judge_may(b_, c, oracle_);
    if (j.truth == Truth::Unknown) throw Aborted("solver returned unknown for " + key + ": " + j.reason);
    Probe p;
    p.sat = j.truth == Truth::Holds;
    if (p.sat) {
      p.witness = j.witness;
      p.value = evaluate(t, resolve_marginals(b_, j.witness->values));
    }
    return memo_.emplace(key, p).first->second;
  }

  std::size_t calls() const { return calls_; }

 private:
  static Constraint make(const Term& t, Op op, const Rational& r) {
    Term k = Term::constant(r);
    switch (op) {
      case Op::Gt: return Constraint::gt(t, k);
      case Op::Geq: return Constraint::geq(t, k);
      case Op::Eq: return Constraint::eq(t, k);
      case Op::Leq: return Constraint::leq(t, k);
      case Op::Lt: return Constraint::lt(t, k);
    }
    return Constraint::truth();
  }

  const ConstrainedBN& b_;
  DecisionProcedure& oracle_;
  std::map<std::string, Probe> memo_;
  std::size_t calls_ = 0;
};

void check_term_variables(const ConstrainedBN& b, const Term& t) {
  for (const auto& v : t.variables())
    if (!b.declares(v)) throw ModelError("unknown variable in term: " + v);
}

Rational half(const Rational& r) { return r / 2; }

/// Shared state of one bracketing run.
struct Run {
  Prober& prober;
  const Term& t;
  const Rational& delta;
  const OptimizeOptions& options;
  IntervalResult& result;
  std::set<std::string> tally;   // formulas of the algorithm proper
  std::set<std::string> extras;  // formulas issued only by invariant checks

  Probe probe(Op op, const Rational& r) { return prober.check(t, op, r, tally, result.stats.sat_checks); }

  void assert_bracket(Op op, bool sup) {
    if (!options.check_invariants) return;
    // sup: may(t >= low) sat and may(t >= high) unsat; inf mirrors with <=.
    // The witnessed end is certified by the exact witness value when it reaches it.
    const Rational& witnessed = sup ? result.low : result.high;
    bool certified = result.witness_value && (sup ? *result.witness_value >= witnessed : *result.witness_value <= witnessed);
    auto sat_at = [&](const Rational& r) {
      if (certified && r == witnessed) return true;
      return prober.check(t, op, r, extras, result.stats.assert_checks).sat;
    };
    bool low_sat, high_sat;
    try {
      low_sat = sat_at(result.low);
      high_sat = sat_at(result.high);
    } catch (const Aborted& e) {
      result.warnings.push_back(std::string("bracket invariant not decided: ") + e.what());
      return;
    }
    bool ok = sup ? (low_sat && !high_sat) : (!low_sat && high_sat);
    if (!ok)
      result.warnings.push_back("bracket invariant failed at [" + to_decimal(result.low, 15) + ", " +
                                to_decimal(result.high, 15) + "]");
  }

  void take(const Probe& p) {
    result.witness = p.witness;
    result.witness_value = p.value;
  }

  void tick(std::size_t& iterations) {
    if (++iterations > options.max_iterations) throw Aborted("iteration limit reached");
  }
};

void run_sup(Run& run) {
  IntervalResult& r = run.result;
  r.stats.algorithm = "sup";
  Probe first = run.probe(Op::Gt, 0);
  Rational cache = first.value;
  if (cache <= 0) throw Aborted("witness of t > 0 evaluates to " + to_decimal(cache, 15));
  r.stats.initial_cache = cache;
  run.take(first);

  std::size_t iterations = 0;
  for (Probe p = run.probe(Op::Geq, 2 * cache); p.sat; p = run.probe(Op::Geq, 2 * cache)) {
    run.tick(iterations);
    if (p.value < 2 * cache - kResidualTolerance)
      throw Aborted("witness of t >= 2*cache evaluates to " + to_decimal(p.value, 15));
    cache = p.value;
    run.take(p);
  }
  r.low = cache;
  r.high = 2 * cache;
  run.assert_bracket(Op::Geq, true);

  iterations = 0;
  while (r.high - r.low > run.delta) {
    run.tick(iterations);
    Rational mid = r.low + half(r.high - r.low);
    Probe p = run.probe(Op::Geq, mid);
    if (p.sat) {
      r.low = mid;
      run.take(p);
    } else {
      r.high = mid;
    }
    run.assert_bracket(Op::Geq, true);
  }
  r.outcome = Outcome::Interval;
  r.stats.bound = sup_check_bound(r.low, *r.stats.initial_cache, run.delta);
  r.stats.counted_bound = sup_counted_bound(r.low, *r.stats.initial_cache, run.delta);
}

void run_inf(Run& run) {
  IntervalResult& r = run.result;
  r.stats.algorithm = "inf";
  Probe first = run.probe(Op::Gt, 0);
  Rational cache = first.value;
  if (cache <= 0) throw Aborted("witness of t > 0 evaluates to " + to_decimal(cache, 15));
  r.stats.initial_cache = cache;
  run.take(first);

  std::size_t iterations = 0;
  for (;;) {
    Probe p = run.probe(Op::Leq, half(cache));
    if (!(p.sat && half(cache) > run.delta)) break;
    run.tick(iterations);
    if (p.value <= 0) throw Aborted("precondition violated: t takes the non-positive value " + to_decimal(p.value, 15));
    cache = p.value;
    run.take(p);
  }
  if (Probe p = run.probe(Op::Leq, half(cache)); p.sat) {
    r.low = 0;
    r.high = half(cache);
    run.take(p);
    r.outcome = Outcome::Interval;
    r.stats.bound = inf_check_bound(*r.stats.initial_cache, run.delta, 0);
    r.stats.counted_bound = inf_counted_bound(*r.stats.initial_cache, run.delta);
    return;
  }
  r.low = half(cache);
  r.high = cache;
  run.assert_bracket(Op::Leq, false);

  iterations = 0;
  while (r.high - r.low > run.delta) {
    run.tick(iterations);
    Rational mid = r.low + half(r.high - r.low);
    Probe p = run.probe(Op::Leq, mid);
    if (p.sat) {
      r.high = mid;
      run.take(p);
    } else {
      r.low = mid;
    }
    run.assert_bracket(Op::Leq, false);
  }
  r.outcome = Outcome::Interval;
  r.stats.bound = inf_check_bound(*r.stats.initial_cache, run.delta, r.high);
  r.stats.counted_bound = inf_counted_bound(*r.stats.initial_cache, run.delta);
}

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

/// Runs sup or inf on t inside an existing prober; aborts become results.
IntervalResult bracket(bool is_sup, Prober& prober, const Term& t, const Rational& delta,
                       const OptimizeOptions& options) {
  IntervalResult result;
  Run run{prober, t, delta, options, result, {}, {}};
  try {
    if (is_sup)
      run_sup(run);
    else
      run_inf(run);
  } catch (const Aborted& e) {
    result.outcome = Outcome::Aborted;
    result.reason = e.what();
  }
  return result;
}

IntervalResult negated(IntervalResult r) {
  Rational low = -r.high;
  r.high = -r.low;
  r.low = low;
  if (r.witness_value) r.witness_value = -*r.witness_value;
  return r;
}

IntervalResult star(const Term& t, const Rational& delta, const OptimizeOptions& options, Prober& prober) {
  std::set<std::string> tally;
  std::size_t dispatch = 0;
  IntervalResult result;
  try {
    Probe positive = prober.check(t, Op::Gt, 0, tally, dispatch);
    if (positive.sat) {
      result = bracket(true, prober, t, delta, options);
    } else if (Probe zero = prober.check(t, Op::Eq, 0, tally, dispatch); zero.sat) {
      result.outcome = Outcome::ZeroExtremum;
      result.witness = zero.witness;
      result.witness_value = zero.value;
    } else if (prober.check(t, Op::Lt, 0, tally, dispatch).sat) {
      result = negated(bracket(false, prober, Term::neg(t), delta, options));
    } else {
      result.outcome = Outcome::Inconsistent;
    }
  } catch (const Aborted& e) {
    result.outcome = Outcome::Aborted;
    result.reason = e.what();
  }
  result.stats.dispatch_checks = dispatch;
  return result;
}

template <class F>
IntervalResult timed(Prober& prober, F&& body) {
  auto start = Clock::now();
  IntervalResult r = body();
  r.stats.oracle_calls = prober.calls();
  r.stats.wall_time_ms = elapsed_ms(start);
  return r;
}

void check_delta(const Rational& delta) {
  if (delta <= 0) throw std::invalid_argument("delta must be positive");
}

}  // namespace

IntervalResult sup_star(const Term& t, const Rational& delta, const ConstrainedBN& b, DecisionProcedure& oracle,
                        const OptimizeOptions& options) {
  check_delta(delta);
  check_term_variables(b, t);
  Prober prober(b, oracle);
  return timed(prober, [&] { return star(t, delta, options, prober); });
}

IntervalResult inf_star(const Term& t, const Rational& delta, const ConstrainedBN& b, DecisionProcedure& oracle,
                        const OptimizeOptions& options) {
  check_delta(delta);
  check_term_variables(b, t);
  Prober prober(b, oracle);
  return timed(prober, [&] {
    IntervalResult r = star(Term::neg(t), delta, options, prober);
    return r.outcome == Outcome::Interval || r.outcome == Outcome::Aborted ? negated(std::move(r)) : r;
  });
}

IntervalResult sup(const Term& t, const Rational& delta, const ConstrainedBN& b, DecisionProcedure& oracle,
                   const OptimizeOptions& options) {
  check_delta(delta);
  check_term_variables(b, t);
  Prober prober(b, oracle);
  return timed(prober, [&] {
    std::set<std::string> tally;
    std::size_t unused = 0;
    Probe positive;
    try {
      positive = prober.check(t, Op::Gt, 0, tally, unused);
    } catch (const Aborted& e) {
      IntervalResult r;
      r.reason = e.what();
      return r;
    }
    return positive.sat ? bracket(true, prober, t, delta, options) : star(t, delta, options, prober);
  });
}

IntervalResult inf(const Term& t, const Rational& delta, const ConstrainedBN& b, DecisionProcedure& oracle,
                   const OptimizeOptions& options) {
  check_delta(delta);
  check_term_variables(b, t);
  Prober prober(b, oracle);
  return timed(prober, [&] {
    std::set<std::string> tally;
    std::size_t unused = 0;
    Probe positive;
    try {
      positive = prober.check(t, Op::Gt, 0, tally, unused);
    } catch (const Aborted& e) {
      IntervalResult r;
      r.reason = e.what();
      return r;
    }
    if (positive.sat) return bracket(false, prober, t, delta, options);
    IntervalResult r = star(Term::neg(t), delta, options, prober);
    return r.outcome == Outcome::Interval || r.outcome == Outcome::Aborted ? negated(std::move(r)) : r;
  });
}

}  // namespace cbn
