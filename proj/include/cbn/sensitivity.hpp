#pragma once

#include <string>
#include <vector>

#include "cbn/inference.hpp"
#include "cbn/polynomial.hpp"
#include "cbn/solver.hpp"

namespace cbn {

/// Hypothesis event O = (node, state) and evidence event x = (node, state).
/// A multi-state hypothesis node is read as {state, every other state}.
struct SensitivitySpec {
  std::string hypothesis_node;
  std::string hypothesis_state;
  std::string evidence_node;
  std::string evidence_state;
};

/// Components PO = p(O), Px = p(x), POx = p(O | x), PxO = p(x | O) as N/D
/// over X_x, and s = PO (1 - POx) Px / (PO PxO + (1 - POx) Px)^2.
struct SensitivityResult {
  RationalFn po, px, pox, pxo;
  Polynomial numerator;    // N_s
  Polynomial denominator;  // D_s = Q^2
  Polynomial root;         // Q
  RationalFn closed_form;  // N_s / D_s, normalized
  std::string variable;    // auxiliary s
  std::vector<Constraint> constraints;  // s*D_s = N_s and D_s > 0 (or s = N_s)
  ConstrainedBN model;     // input model with s declared and defined
  std::size_t largest_clique = 0;
};

/// Throws ModelError for unknown nodes or states, equal hypothesis and
/// evidence nodes, or a taken variable name; CapExceeded from inference.
/// With an oracle, a satisfiable D_s = 0 under C throws ModelError
/// "sensitivity undefined on feasible set".
SensitivityResult sensitivity_value(const ConstrainedBN& b, const SensitivitySpec& spec, const std::string& variable = "s",
                                    DecisionProcedure* oracle = nullptr, const InferenceOptions& options = {});

/// s from the four component values.
Rational sensitivity_formula(const Rational& po, const Rational& px, const Rational& pox, const Rational& pxo);

}  // namespace cbn
