#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cbn/model.hpp"
#include "cbn/polynomial.hpp"

namespace cbn {

// ---------------------------------------------------------------------------
// Exact enumeration oracle

class CapExceeded : public std::runtime_error {
 public:
  CapExceeded(const std::string& message, std::size_t size) : std::runtime_error(message), size_(size) {}
  std::size_t size() const { return size_; }

 private:
  std::size_t size_;
};

struct JointDistribution {
  std::vector<std::string> nodes;                // network order
  std::vector<std::vector<std::string>> states;  // per node
  /// Full state tuple (indices in network order) -> probability.
  std::map<std::vector<std::size_t>, Rational> p;
};

/// Chain-rule product over every full configuration; zero-probability
/// configurations are omitted. Throws CapExceeded above `cap` configurations.
JointDistribution enumerate_joint(const ConcreteBN& b, std::size_t cap = 1'000'000);

/// Sum (unconditional) or ratio of sums (conditional). Throws ModelError on
/// zero-probability evidence.
Rational query_joint(const JointDistribution& joint, const MarginalSpec& spec);

// ---------------------------------------------------------------------------
// Junction tree construction

struct UndirectedGraph {
  std::vector<std::string> names;
  std::vector<std::set<std::size_t>> adjacent;

  bool has_edge(std::size_t a, std::size_t b) const { return adjacent[a].count(b) > 0; }
};

/// Parents married, directions dropped.
UndirectedGraph moralize(const BasicNetwork<Term>& b);

struct Triangulation {
  std::vector<std::size_t> order;                            // elimination order
  std::vector<std::pair<std::size_t, std::size_t>> fill_in;  // added edges
  std::vector<std::set<std::size_t>> cliques;                // maximal cliques, in elimination order
};

/// Min-fill elimination; ties go to the lexicographically smallest name.
Triangulation triangulate(const UndirectedGraph& g);

struct JunctionTree {
  std::vector<std::set<std::size_t>> cliques;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // clique index pairs

  std::set<std::size_t> separator(std::size_t edge) const;
  /// Every node shared by two cliques appears on the path between them.
  bool has_running_intersection() const;
};

/// Maximum-weight spanning tree with separator size as weight; components
/// are joined by empty separators.
JunctionTree build_junction_tree(const std::vector<std::set<std::size_t>>& cliques);

// ---------------------------------------------------------------------------
// Symbolic propagation

/// Table over a sorted set of network nodes; entries in mixed radix with the
/// last node varying fastest.
struct Potential {
  std::vector<std::size_t> nodes;
  std::vector<std::size_t> cards;
  std::vector<Polynomial> values;

  std::size_t size() const { return values.size(); }
};

struct InferenceOptions {
  std::size_t clique_cap = 100'000;  // max entries per clique table
  bool denominator_guard = true;     // emit D > 0 for non-constant D
};

struct CompiledNetwork {
  UndirectedGraph moral;
  Triangulation triangulation;
  JunctionTree tree;
  std::vector<Potential> potentials;  // one per clique, evidence applied
  std::size_t largest_clique = 0;     // entries
};

/// Builds the junction tree and clique potentials for the given evidence.
/// Throws CapExceeded when a clique table would exceed options.clique_cap.
CompiledNetwork compile(const ConstrainedBN& b, const std::map<std::string, std::string>& evidence,
                        const InferenceOptions& options = {});

/// Two-pass Shafer-Shenoy message passing; returns every clique belief.
/// Only additions and multiplications of polynomials occur.
std::vector<Potential> propagate(const CompiledNetwork& net);

/// Belief of one clique after a collect pass towards it.
Potential collect(const CompiledNetwork& net, std::size_t root);

struct MarginalDefinition {
  std::string mp;
  Polynomial numerator;    // N
  Polynomial denominator;  // D; 1 without evidence
  std::vector<Constraint> constraints;
  std::size_t largest_clique = 0;
};

MarginalDefinition symbolic_marginal(const ConstrainedBN& b, const MarginalSpec& spec, const std::string& mp,
                                     const InferenceOptions& options = {});

/// Defining constraints for N/D: mp = N, or mp*D = N with D > 0 when D is
/// not constant and the guard is on.
std::vector<Constraint> defining_constraints(const std::string& mp, const Polynomial& n, const Polynomial& d,
                                             bool denominator_guard);

/// Adds mp `name` for spec with its defining constraints. Throws ModelError
/// if the name is taken.
ConstrainedBN install_marginal(const ConstrainedBN& b, const MarginalSpec& spec, const std::string& name,
                               const InferenceOptions& options = {});

/// Generates defining constraints for every recorded marginal that has no
/// valid definition in C yet; returns the names generated.
std::vector<std::string> ensure_marginal_definitions(ConstrainedBN& b, const InferenceOptions& options = {});

}  // namespace cbn
