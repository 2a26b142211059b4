#include "cbn/logic.hpp"

#include <algorithm>
#include <set>

namespace cbn {

std::string to_string(Truth t) {
  switch (t) {
    case Truth::Holds: return "holds";
    case Truth::Fails: return "fails";
    case Truth::Unknown: return "unknown";
  }
  return "unknown";
}

namespace {

void collect_free(const Query& q, std::set<std::string>& bound, std::set<std::string>& free) {
  switch (q.kind()) {
    case Query::Kind::Base:
      for (const auto& v : q.constraint().variables())
        if (!bound.count(v)) free.insert(v);
      return;
    case Query::Kind::Exists: {
      bool fresh = bound.insert(q.bound().name).second;
      collect_free(q.body(), bound, free);
      if (fresh) bound.erase(q.bound().name);
      return;
    }
    case Query::Kind::Not:
      collect_free(q.body(), bound, free);
      return;
    case Query::Kind::And:
      collect_free(q.first(), bound, free);
      collect_free(q.second(), bound, free);
      return;
  }
}

void check_free_variables(const ConstrainedBN& b, const Query& phi) {
  std::set<std::string> bound, free;
  collect_free(phi, bound, free);
  for (const auto& v : free)
    if (!b.declares(v)) throw ModelError("unknown variable in formula: " + v);
}

/// Variables and assertions of the may formula.
struct Closure {
  std::vector<std::string> variables;
  std::vector<Constraint> assertions;
};

Closure closure(const ConstrainedBN& b, const Query& phi) {
  check_free_variables(b, phi);
  if (!phi.is_prenex_existential()) throw UnsupportedQuery("unsupported: non-prenex query");
  Closure out;
  out.variables = b.variables();
  for (const auto& v : phi.prefix()) {
    if (b.declares(v.name)) throw UnsupportedQuery("bound variable shadows a model variable: " + v.name);
    if (std::find(out.variables.begin(), out.variables.end(), v.name) == out.variables.end())
      out.variables.push_back(v.name);
  }
  out.assertions.push_back(phi.matrix());
  out.assertions.insert(out.assertions.end(), b.constraints.begin(), b.constraints.end());
  return out;
}

Judgment from_verdict(Verdict v, bool sat_means_holds) {
  Judgment j;
  j.reason = std::move(v.reason);
  switch (v.status) {
    case SatStatus::Sat:
      j.truth = sat_means_holds ? Truth::Holds : Truth::Fails;
      j.witness = std::move(v.witness);
      break;
    case SatStatus::Unsat:
      j.truth = sat_means_holds ? Truth::Fails : Truth::Holds;
      break;
    case SatStatus::Unknown:
      j.truth = Truth::Unknown;
      break;
  }
  return j;
}

}  // namespace

Query build_may_formula(const ConstrainedBN& b, const Query& phi) {
  Closure c = closure(b, phi);
  Query q = Query::base(Constraint::conj(c.assertions));
  for (auto it = c.variables.rbegin(); it != c.variables.rend(); ++it) {
    VarKind kind = b.mp_vars.count(*it) ? VarKind::Marginal : VarKind::Prob;
    q = Query::exists(VarRef{*it, kind}, q);
  }
  return q;
}

Query build_may_formula(const ConstrainedBN& b, const Constraint& phi) { return build_may_formula(b, Query::base(phi)); }

Judgment judge_may(const ConstrainedBN& b, const Query& phi, DecisionProcedure& oracle) {
  Closure c = closure(b, phi);
  return from_verdict(oracle.check(c.variables, c.assertions), true);
}

Judgment judge_may(const ConstrainedBN& b, const Constraint& phi, DecisionProcedure& oracle) {
  return judge_may(b, Query::base(phi), oracle);
}

Judgment judge_must(const ConstrainedBN& b, const Query& phi, DecisionProcedure& oracle) {
  check_free_variables(b, phi);
  if (!phi.is_quantifier_free()) throw UnsupportedQuery("unsupported: non-prenex query");
  Closure c = closure(b, Query::base(Constraint::negate(phi.matrix())));
  Judgment j = from_verdict(oracle.check(c.variables, c.assertions), false);
  if (j.truth == Truth::Holds) {
    Verdict consistent = check_consistent(b, oracle);
    if (consistent.status == SatStatus::Unsat) j.warnings.push_back(kVacuousWarning);
    if (consistent.status == SatStatus::Unknown) j.warnings.push_back("consistency unknown: " + consistent.reason);
  }
  return j;
}

Judgment judge_must(const ConstrainedBN& b, const Constraint& phi, DecisionProcedure& oracle) {
  return judge_must(b, Query::base(phi), oracle);
}

Verdict check_consistent(const ConstrainedBN& b, DecisionProcedure& oracle) {
  return oracle.check(b.variables(), b.constraints);
}

std::string emit_script(const Query& q) {
  if (!q.is_prenex_existential()) throw UnsupportedQuery("unsupported: non-prenex query");
  std::vector<std::string> variables;
  for (const auto& v : q.prefix())
    if (std::find(variables.begin(), variables.end(), v.name) == variables.end()) variables.push_back(v.name);
  std::vector<Constraint> assertions;
  for (const auto& c : conjuncts(q.matrix())) assertions.push_back(eliminate_division(c));
  return emit_script(variables, assertions);
}

}  // namespace cbn
