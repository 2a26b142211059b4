#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbn/rational.hpp"
#include "cbn/solver.hpp"
#include "cbn/term.hpp"

namespace cbn {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A node with its probability table. table[r][s] is the entry for parent
/// configuration r and own state s; configurations enumerate the parents'
/// states in mixed radix with the last parent varying fastest.
template <class Entry>
struct BasicNode {
  std::string name;
  std::vector<std::string> states;
  std::vector<std::string> parents;
  std::vector<std::vector<Entry>> table;

  std::size_t state_index(std::string_view label) const {
    for (std::size_t i = 0; i < states.size(); ++i)
      if (states[i] == label) return i;
    throw ModelError("node " + name + " has no state " + std::string(label));
  }

  friend bool operator==(const BasicNode&, const BasicNode&) = default;
};

/// DAG of nodes; structure helpers shared by symbolic and concrete networks.
template <class Entry>
struct BasicNetwork {
  std::vector<BasicNode<Entry>> nodes;

  bool has_node(std::string_view name) const {
    for (const auto& n : nodes)
      if (n.name == name) return true;
    return false;
  }

  std::size_t index_of(std::string_view name) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].name == name) return i;
    throw ModelError("unknown node: " + std::string(name));
  }

  const BasicNode<Entry>& node(std::string_view name) const { return nodes[index_of(name)]; }

  /// Parents' state counts, in parent order.
  std::vector<std::size_t> parent_cardinalities(const BasicNode<Entry>& n) const {
    std::vector<std::size_t> out;
    for (const auto& p : n.parents) out.push_back(node(p).states.size());
    return out;
  }

  std::size_t row_count(const BasicNode<Entry>& n) const {
    std::size_t rows = 1;
    for (auto c : parent_cardinalities(n)) rows *= c;
    return rows;
  }

  /// Row of a parent configuration given as state indices in parent order.
  std::size_t row_index(const BasicNode<Entry>& n, const std::vector<std::size_t>& parent_states) const {
    auto cards = parent_cardinalities(n);
    std::size_t row = 0;
    for (std::size_t i = 0; i < cards.size(); ++i) row = row * cards[i] + parent_states[i];
    return row;
  }

  /// Nodes ordered so that every parent precedes its children; throws on cycles.
  std::vector<std::size_t> topological_order() const {
    std::vector<std::size_t> order;
    std::vector<int> mark(nodes.size(), 0);  // 0 new, 1 on stack, 2 done
    auto visit = [&](auto&& self, std::size_t i) -> void {
      if (mark[i] == 2) return;
      if (mark[i] == 1) throw ModelError("cycle detected through node " + nodes[i].name);
      mark[i] = 1;
      for (const auto& p : nodes[i].parents) self(self, index_of(p));
      mark[i] = 2;
      order.push_back(i);
    };
    for (std::size_t i = 0; i < nodes.size(); ++i) visit(visit, i);
    return order;
  }

  /// Unique node and state names, known parents, acyclicity, table shape.
  void check_structure() const {
    std::set<std::string, std::less<>> seen;
    for (const auto& n : nodes) {
      if (!seen.insert(n.name).second) throw ModelError("duplicate node name: " + n.name);
      if (n.states.empty()) throw ModelError("node " + n.name + " has no states");
      std::set<std::string, std::less<>> labels;
      for (const auto& s : n.states)
        if (!labels.insert(s).second) throw ModelError("duplicate state " + s + " in node " + n.name);
      std::set<std::string, std::less<>> parents;
      for (const auto& p : n.parents) {
        if (!has_node(p)) throw ModelError("node " + n.name + " has unknown parent " + p);
        if (!parents.insert(p).second) throw ModelError("node " + n.name + " lists parent " + p + " twice");
      }
    }
    topological_order();
    for (const auto& n : nodes) {
      if (n.table.size() != row_count(n)) throw ModelError("table arity mismatch for node " + n.name);
      for (const auto& row : n.table)
        if (row.size() != n.states.size()) throw ModelError("table arity mismatch for node " + n.name);
    }
  }

  friend bool operator==(const BasicNetwork&, const BasicNetwork&) = default;
};

using NodeSpec = BasicNode<Term>;
using ConcreteNode = BasicNode<Rational>;

struct ConcreteBN : BasicNetwork<Rational> {};

/// Hard-evidence (conditional) marginal p(target = state | evidence).
struct MarginalSpec {
  std::string target_node;
  std::string target_state;
  std::map<std::string, std::string> evidence;

  friend bool operator==(const MarginalSpec&, const MarginalSpec&) = default;
};

struct ConstrainedBN : BasicNetwork<Term> {
  std::set<std::string> x_vars;
  std::set<std::string> mp_vars;
  std::vector<Constraint> constraints;
  std::map<std::string, MarginalSpec> marginal_defs;

  /// X_x ∪ X_mp, sorted.
  std::vector<std::string> variables() const;
  bool declares(std::string_view name) const { return x_vars.count(std::string(name)) || mp_vars.count(std::string(name)); }

  friend bool operator==(const ConstrainedBN&, const ConstrainedBN&) = default;
};

/// Throws ModelError unless spec names existing nodes and states and the
/// target is not itself observed.
void check_marginal_spec(const BasicNetwork<Term>& b, const MarginalSpec& spec);

/// Parses a model document. Pure: no constraints are generated. Throws
/// ModelError (schema, cycles, duplicates, arity, "variable not in X").
ConstrainedBN load_model(std::string_view json_text);
ConstrainedBN load_model_file(const std::filesystem::path& path);

/// Canonical document text; load_model(save_model(b)) == b.
std::string save_model(const ConstrainedBN& b);
void save_model_file(const ConstrainedBN& b, const std::filesystem::path& path);

struct Violation {
  std::string variable;
  std::string rule;

  friend bool operator==(const Violation&, const Violation&) = default;
};

/// One defining-equation candidate found in a constraint: the marginal it
/// would define and whether its other parts are free of marginal variables.
struct DefinitionCandidate {
  std::string mp;
  bool valid;
};

/// Recognizes mp = t, t = mp, mp*t = t' and t*mp = t' (either side) in an
/// equality atom.
std::vector<DefinitionCandidate> definition_candidates(const Constraint& c, const std::set<std::string>& mp_vars);

/// Replaces the value of every marginal variable with a valid definition by
/// its exact value under the other variables of `a`; definitions that cannot
/// be evaluated (unbound variables, zero cofactor) leave the entry as is.
Assignment resolve_marginals(const ConstrainedBN& b, Assignment a);

/// Empty iff the model is well-formed.
std::vector<Violation> validate_well_formed(const ConstrainedBN& b);

/// Evaluates every table entry under a. Constraints whose variables a binds
/// are checked exactly. Throws ModelError on violated constraints or tables
/// that are not probability distributions.
ConcreteBN concretize(const ConstrainedBN& b, const Assignment& a);

enum class Soundness { Sound, Unsound, Unknown };

struct SoundnessResult {
  Soundness status = Soundness::Unknown;
  std::optional<Witness> witness;  // Unsound only
  std::string reason;
  std::size_t rows_discharged = 0;  // rows proven by simplification alone
};

/// Decides soundness with one satisfiability query over the entries and
/// row sums not already settled by simplification.
SoundnessResult check_sound(const ConstrainedBN& b, DecisionProcedure& oracle);

}  // namespace cbn
