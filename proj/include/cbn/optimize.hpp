#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cbn/model.hpp"
#include "cbn/solver.hpp"

namespace cbn {

struct OptimizeOptions {
  /// Re-check the bracket invariants after every update; failures become warnings.
  bool check_invariants = false;
  /// Cap on loop iterations of the doubling, halving and bisection phases.
  std::size_t max_iterations = 4096;
};

enum class Outcome { Interval, ZeroExtremum, Inconsistent, Aborted };

std::string to_string(Outcome o);

struct OptimizeStats {
  std::string algorithm;                  // "sup" or "inf": the bracketing run
  std::size_t sat_checks = 0;             // distinct probe formulas of that run
  std::size_t dispatch_checks = 0;        // sign probes of the starred wrappers
  std::size_t assert_checks = 0;          // probes issued only by invariant checks
  std::size_t oracle_calls = 0;           // probes that reached the oracle
  std::optional<Rational> initial_cache;  // c
  std::optional<double> bound;            // published check-count bound from c, delta, the bracket
  std::optional<double> counted_bound;    // same, counting every probe of the run
  double wall_time_ms = 0;
};

/// Interval: low <= high, high - low <= delta, and the witness attains a
/// value of t on the witnessed side (>= low for sup, <= high for inf).
/// Aborted keeps the last bracket, when one was established.
struct IntervalResult {
  Outcome outcome = Outcome::Aborted;
  Rational low = 0;
  Rational high = 0;
  std::optional<Witness> witness;
  std::optional<Rational> witness_value;  // exact t at the witness, marginals re-derived from X_x
  OptimizeStats stats;
  std::vector<std::string> warnings;
  std::string reason;
};

/// Bracket for sup t by doubling then bisection. Assumes 0 < sup t < inf;
/// when t > 0 is unsatisfiable the result is that of sup_star.
IntervalResult sup(const Term& t, const Rational& delta, const ConstrainedBN& b, DecisionProcedure& oracle,
                   const OptimizeOptions& options = {});

/// Bracket for inf t by halving then bisection, returning [0, cache/2] once
/// t <= cache/2 is satisfiable with cache/2 <= delta. Assumes t >= 0 with a
/// positive value; when t > 0 is unsatisfiable the result is that of inf_star.
IntervalResult inf(const Term& t, const Rational& delta, const ConstrainedBN& b, DecisionProcedure& oracle,
                   const OptimizeOptions& options = {});

/// Dispatch on t > 0, t = 0, t < 0; the last case negates the result of
/// inf(-t). Inconsistent when all three are unsatisfiable.
IntervalResult sup_star(const Term& t, const Rational& delta, const ConstrainedBN& b, DecisionProcedure& oracle,
                        const OptimizeOptions& options = {});

/// Mirror of sup_star(-t).
IntervalResult inf_star(const Term& t, const Rational& delta, const ConstrainedBN& b, DecisionProcedure& oracle,
                        const OptimizeOptions& options = {});

/// floor(2 log2(sup) - log2(c) - log2(delta) + 1).
double sup_check_bound(const Rational& sup, const Rational& c, const Rational& delta);
/// 1 + floor(2 log2(c) - log2(min(delta, inf))); infinite when inf = 0.
double inf_check_bound(const Rational& c, const Rational& delta, const Rational& inf);

/// Probes of a sup run including the initial t > 0 check and the failing
/// doubling guard: 2 + floor(log2(sup/c)) + ceil(log2(sup/delta)).
double sup_counted_bound(const Rational& sup, const Rational& c, const Rational& delta);
/// Probes of an inf run including the initial t > 0 check and the failing
/// halving guard: 2 + ceil(log2(c/delta)).
double inf_counted_bound(const Rational& c, const Rational& delta);

}  // namespace cbn
