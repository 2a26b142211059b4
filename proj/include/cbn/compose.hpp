#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cbn/model.hpp"
#include "cbn/solver.hpp"

namespace cbn {

enum class RenamePolicy { RejectCollisions, AutoSuffix };

/// Link constraints refer to post-rename names and must not define any
/// marginal variable of either operand.
struct UnionRecipe {
  ConstrainedBN left;
  ConstrainedBN right;
  std::vector<Constraint> links;
  RenamePolicy policy = RenamePolicy::RejectCollisions;
  std::string left_tag = "L";  // AutoSuffix: colliding name n becomes n_L / n_R
  std::string right_tag = "R";
};

/// Old name -> new name, renamed entries only.
struct RenameMap {
  std::map<std::string, std::string> left_nodes;
  std::map<std::string, std::string> right_nodes;
  std::map<std::string, std::string> left_variables;
  std::map<std::string, std::string> right_variables;
};

struct UnionResult {
  ConstrainedBN model;
  RenameMap renames;
  std::vector<std::string> link_variables;  // added to X_x
  std::vector<std::string> warnings;
};

/// Disjoint union of graphs and tables with constraints C1 ∪ C2 ∪ links.
/// Throws ModelError on collisions under RejectCollisions, on a link that
/// redefines a marginal, and on an ill-formed result. With an oracle the
/// result's soundness is checked; unsound results throw.
UnionResult constrained_union(const UnionRecipe& recipe, DecisionProcedure* oracle = nullptr);

struct UnionLawReport {
  std::size_t formulas = 0;
  std::size_t comparisons = 0;
  std::size_t unknown = 0;  // comparisons skipped because a verdict was unknown
  std::vector<std::string> disagreements;
};

/// Samples quantifier-free formulas over the combined variables and
/// compares may and must verdicts of (b1 ∪C b2) ∪C' b3 against
/// b1 ∪C (b2 ∪C' b3), and of b1 ∪C b2 against b2 ∪C b1. Variables of the
/// operands must be pairwise disjoint; node collisions are suffixed.
UnionLawReport check_union_laws(const ConstrainedBN& b1, const ConstrainedBN& b2, const ConstrainedBN& b3,
                                const std::vector<Constraint>& c, const std::vector<Constraint>& c_prime,
                                DecisionProcedure& oracle, std::size_t formulas = 10, std::uint64_t seed = 1);

}  // namespace cbn
