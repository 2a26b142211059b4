#include "cbn/compose.hpp"

#include <set>

#include "cbn/generate.hpp"
#include "cbn/logic.hpp"

namespace cbn {

namespace {

using Renames = std::map<std::string, std::string, std::less<>>;

std::set<std::string> node_names(const ConstrainedBN& b) {
  std::set<std::string> out;
  for (const auto& n : b.nodes) out.insert(n.name);
  return out;
}

std::set<std::string> declared(const ConstrainedBN& b) {
  std::set<std::string> out = b.x_vars;
  out.insert(b.mp_vars.begin(), b.mp_vars.end());
  return out;
}

std::string lookup(const Renames& m, const std::string& name) {
  auto it = m.find(name);
  return it == m.end() ? name : it->second;
}

ConstrainedBN apply(const ConstrainedBN& b, const Renames& nodes, const Renames& vars) {
  ConstrainedBN out;
  for (const auto& n : b.nodes) {
    NodeSpec r = n;
    r.name = lookup(nodes, n.name);
    for (auto& p : r.parents) p = lookup(nodes, p);
    for (auto& row : r.table)
      for (auto& entry : row) entry = entry.rename(vars);
    out.nodes.push_back(std::move(r));
  }
  for (const auto& v : b.x_vars) out.x_vars.insert(lookup(vars, v));
  for (const auto& v : b.mp_vars) out.mp_vars.insert(lookup(vars, v));
  for (const auto& c : b.constraints) out.constraints.push_back(c.rename(vars));
  for (const auto& [mp, spec] : b.marginal_defs) {
    MarginalSpec s{lookup(nodes, spec.target_node), spec.target_state, {}};
    for (const auto& [node, state] : spec.evidence) s.evidence[lookup(nodes, node)] = state;
    out.marginal_defs[lookup(vars, mp)] = s;
  }
  return out;
}

/// Suffixes names present on both sides, or rejects them.
void resolve(const std::set<std::string>& left, const std::set<std::string>& right, const UnionRecipe& r,
             const char* what, Renames& left_map, Renames& right_map) {
  for (const auto& name : left) {
    if (!right.count(name)) continue;
    if (r.policy == RenamePolicy::RejectCollisions) throw ModelError(std::string(what) + " name collision: " + name);
    left_map[name] = name + "_" + r.left_tag;
    right_map[name] = name + "_" + r.right_tag;
  }
}

void record(const Renames& from, std::map<std::string, std::string>& to) { to.insert(from.begin(), from.end()); }

}  // namespace

UnionResult constrained_union(const UnionRecipe& recipe, DecisionProcedure* oracle) {
  if (recipe.policy == RenamePolicy::AutoSuffix && recipe.left_tag == recipe.right_tag)
    throw ModelError("rename tags must differ");
  Renames left_nodes, right_nodes, left_vars, right_vars;
  resolve(node_names(recipe.left), node_names(recipe.right), recipe, "node", left_nodes, right_nodes);
  resolve(declared(recipe.left), declared(recipe.right), recipe, "variable", left_vars, right_vars);

  ConstrainedBN left = apply(recipe.left, left_nodes, left_vars);
  ConstrainedBN right = apply(recipe.right, right_nodes, right_vars);

  UnionResult out;
  record(left_nodes, out.renames.left_nodes);
  record(right_nodes, out.renames.right_nodes);
  record(left_vars, out.renames.left_variables);
  record(right_vars, out.renames.right_variables);

  ConstrainedBN& u = out.model;
  u.nodes = left.nodes;
  u.nodes.insert(u.nodes.end(), right.nodes.begin(), right.nodes.end());
  std::set<std::string> seen;
  for (const auto& n : u.nodes)
    if (!seen.insert(n.name).second) throw ModelError("node name collision after renaming: " + n.name);
  for (const auto& v : declared(left))
    if (declared(right).count(v)) throw ModelError("variable name collision after renaming: " + v);

  u.x_vars = left.x_vars;
  u.x_vars.insert(right.x_vars.begin(), right.x_vars.end());
  u.mp_vars = left.mp_vars;
  u.mp_vars.insert(right.mp_vars.begin(), right.mp_vars.end());
  u.marginal_defs = left.marginal_defs;
  u.marginal_defs.insert(right.marginal_defs.begin(), right.marginal_defs.end());
  u.constraints = left.constraints;
  u.constraints.insert(u.constraints.end(), right.constraints.begin(), right.constraints.end());

  for (const auto& link : recipe.links) {
    for (const auto& part : conjuncts(link))
      for (const auto& candidate : definition_candidates(part, u.mp_vars))
        throw ModelError("link constraint redefines marginal: " + candidate.mp);
    for (const auto& v : link.variables())
      if (!u.declares(v)) {
        u.x_vars.insert(v);
        out.link_variables.push_back(v);
      }
    u.constraints.push_back(link);
  }

  u.check_structure();
  std::vector<Violation> violations = validate_well_formed(u);
  if (!violations.empty())
    throw ModelError("union is not well-formed: " + violations[0].variable + ": " + violations[0].rule);

  if (oracle != nullptr) {
    SoundnessResult s = check_sound(u, *oracle);
    if (s.status == Soundness::Unsound) throw ModelError("union is not sound");
    if (s.status == Soundness::Unknown) out.warnings.push_back("soundness unknown: " + s.reason);
  }
  return out;
}

namespace {

ConstrainedBN join(const ConstrainedBN& a, const ConstrainedBN& b, const std::vector<Constraint>& links,
                   const std::string& left_tag, const std::string& right_tag) {
  UnionRecipe r{a, b, links, RenamePolicy::AutoSuffix, left_tag, right_tag};
  return constrained_union(r).model;
}

std::string compare(const char* law, const char* mode, const Constraint& phi, const Judgment& x, const Judgment& y,
                    UnionLawReport& report) {
  ++report.comparisons;
  if (x.truth == Truth::Unknown || y.truth == Truth::Unknown) {
    ++report.unknown;
    return {};
  }
  if (x.truth == y.truth) return {};
  return std::string(law) + ": " + mode + " verdicts differ on " + to_string(phi);
}

}  // namespace

UnionLawReport check_union_laws(const ConstrainedBN& b1, const ConstrainedBN& b2, const ConstrainedBN& b3,
                                const std::vector<Constraint>& c, const std::vector<Constraint>& c_prime,
                                DecisionProcedure& oracle, std::size_t formulas, std::uint64_t seed) {
  std::set<std::string> all;
  for (const auto* b : {&b1, &b2, &b3})
    for (const auto& v : declared(*b))
      if (!all.insert(v).second) throw ModelError("operands share variable " + v);

  // Node suffixes differ per grouping; judgments only see variables.
  ConstrainedBN left_assoc = join(join(b1, b2, c, "1", "2"), b3, c_prime, "12", "3");
  ConstrainedBN right_assoc = join(b1, join(b2, b3, c_prime, "2", "3"), c, "1", "23");
  ConstrainedBN forward = join(b1, b2, c, "1", "2");
  ConstrainedBN swapped = join(b2, b1, c, "2", "1");

  UnionLawReport report;
  SplitMix64 rng(seed);
  std::vector<std::string> vars3 = left_assoc.variables();
  std::vector<std::string> vars2 = forward.variables();
  for (std::size_t i = 0; i < formulas; ++i) {
    ++report.formulas;
    Constraint phi = random_constraint(rng, vars3, 3);
    Constraint psi = random_constraint(rng, vars2, 3);
    for (const std::string& d :
         {compare("associativity", "may", phi, judge_may(left_assoc, phi, oracle), judge_may(right_assoc, phi, oracle), report),
          compare("associativity", "must", phi, judge_must(left_assoc, phi, oracle), judge_must(right_assoc, phi, oracle), report),
          compare("symmetry", "may", psi, judge_may(forward, psi, oracle), judge_may(swapped, psi, oracle), report),
          compare("symmetry", "must", psi, judge_must(forward, psi, oracle), judge_must(swapped, psi, oracle), report)})
      if (!d.empty()) report.disagreements.push_back(d);
  }
  return report;
}

}  // namespace cbn
