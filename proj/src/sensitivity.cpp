#include "cbn/sensitivity.hpp"

#include <algorithm>

#include "cbn/logic.hpp"

namespace cbn {

Rational sensitivity_formula(const Rational& po, const Rational& px, const Rational& pox, const Rational& pxo) {
  Rational inner = po * pxo + (1 - pox) * px;
  if (inner == 0) throw EvaluationError("sensitivity denominator is zero");
  return po * (1 - pox) * px / (inner * inner);
}

namespace {

RationalFn component(const ConstrainedBN& b, MarginalSpec spec, const InferenceOptions& options,
                     std::size_t& largest) {
  MarginalDefinition d = symbolic_marginal(b, spec, "_", options);
  largest = std::max(largest, d.largest_clique);
  return RationalFn(d.numerator, d.denominator);
}

}  // namespace

SensitivityResult sensitivity_value(const ConstrainedBN& b, const SensitivitySpec& spec, const std::string& variable,
                                    DecisionProcedure* oracle, const InferenceOptions& options) {
  if (spec.hypothesis_node == spec.evidence_node)
    throw ModelError("hypothesis and evidence must be different nodes");
  if (b.declares(variable)) throw ModelError("name collision: " + variable);
  b.node(spec.hypothesis_node).state_index(spec.hypothesis_state);
  b.node(spec.evidence_node).state_index(spec.evidence_state);

  SensitivityResult r;
  r.variable = variable;
  const std::string &o = spec.hypothesis_node, &os = spec.hypothesis_state;
  const std::string &e = spec.evidence_node, &es = spec.evidence_state;
  r.po = component(b, {o, os, {}}, options, r.largest_clique);
  r.px = component(b, {e, es, {}}, options, r.largest_clique);
  r.pox = component(b, {o, os, {{e, es}}}, options, r.largest_clique);
  r.pxo = component(b, {e, es, {{o, os}}}, options, r.largest_clique);

  // With PO = a/A, Px = p/P, POx = c/C, PxO = d/E (denominators positive on
  // the guarded feasible set): s = a (C - c) p A P C E^2 / Q^2 where
  // Q = a d C P + (C - c) p A E.
  const Polynomial &a = r.po.num(), &A = r.po.den();
  const Polynomial &p = r.px.num(), &P = r.px.den();
  const Polynomial &c = r.pox.num(), &C = r.pox.den();
  const Polynomial &d = r.pxo.num(), &E = r.pxo.den();
  Polynomial complement = C - c;
  Polynomial q = a * d * C * P + complement * p * A * E;
  r.numerator = a * complement * p * A * P * C * E * E;
  r.root = q;
  r.denominator = q * q;
  if (r.denominator.is_zero()) throw ModelError("sensitivity undefined on feasible set");
  r.closed_form = RationalFn(r.numerator, r.denominator);

  if (oracle != nullptr && !r.denominator.is_constant()) {
    Judgment zero = judge_may(b, Constraint::eq(q.to_term(), Term::constant(0)), *oracle);
    if (zero.truth == Truth::Holds) throw ModelError("sensitivity undefined on feasible set");
    if (zero.truth == Truth::Unknown) throw SolverError("cannot decide whether the sensitivity is defined: " + zero.reason);
  }

  r.constraints = defining_constraints(variable, r.closed_form.num(), r.closed_form.den(), options.denominator_guard);
  r.model = b;
  r.model.mp_vars.insert(variable);
  r.model.constraints.insert(r.model.constraints.end(), r.constraints.begin(), r.constraints.end());
  return r;
}

}  // namespace cbn
