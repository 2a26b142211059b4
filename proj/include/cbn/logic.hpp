#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbn/model.hpp"
#include "cbn/solver.hpp"

namespace cbn {

/// Queries outside the supported fragment: must needs a quantifier-free
/// formula, may an existential prefix over a quantifier-free matrix.
class UnsupportedQuery : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kVacuousWarning = "vacuous: model inconsistent";

enum class Truth { Holds, Fails, Unknown };

std::string to_string(Truth t);

/// Outcome of a may or must judgment. For may the witness satisfies phi;
/// for a failed must it is a counterexample satisfying !phi.
struct Judgment {
  Truth truth = Truth::Unknown;
  std::optional<Witness> witness;
  std::vector<std::string> warnings;
  std::string reason;  // set when Unknown
};

/// exists X: exists prefix(phi): matrix(phi) & C, with X in sorted order.
/// Throws ModelError if phi mentions a free variable outside X, and
/// UnsupportedQuery unless phi is prenex-existential.
Query build_may_formula(const ConstrainedBN& b, const Query& phi);
Query build_may_formula(const ConstrainedBN& b, const Constraint& phi);

Judgment judge_may(const ConstrainedBN& b, const Query& phi, DecisionProcedure& oracle);
Judgment judge_may(const ConstrainedBN& b, const Constraint& phi, DecisionProcedure& oracle);

/// Computed as the negation of may(!phi). A must that holds on an
/// inconsistent model carries kVacuousWarning.
Judgment judge_must(const ConstrainedBN& b, const Query& phi, DecisionProcedure& oracle);
Judgment judge_must(const ConstrainedBN& b, const Constraint& phi, DecisionProcedure& oracle);

/// Sat iff the model has a concretization.
Verdict check_consistent(const ConstrainedBN& b, DecisionProcedure& oracle);

/// Script for a prenex-existential query: one real constant per bound
/// variable, one assertion per conjunct of the matrix.
std::string emit_script(const Query& q);

}  // namespace cbn
