#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cbn/model.hpp"

namespace cbn {

struct GeneratorOptions {
  std::size_t nodes = 5;
  std::size_t x_vars = 2;
  std::size_t min_states = 1;
  std::size_t max_states = 10;
  std::size_t max_parents = 3;
};

struct GeneratedModel {
  ConstrainedBN model;  // the suggested marginal is recorded but not yet defined
  MarginalSpec suggested;
  std::string marginal_name;
};

/// Deterministic under the seed (the generator avoids library distributions,
/// whose output differs between standard libraries).
///
/// Parents are drawn uniformly from earlier nodes, at most max_parents each.
/// Each row is either positive two-decimal constants summing to 1 or one
/// variable x placed as x and 1 - x on two states with 0 elsewhere. One node
/// is observed in its first state, whose entries are never the constant 0.
GeneratedModel generate_random(std::uint64_t seed, const GeneratorOptions& options);

class SplitMix64;

/// Random quantifier-free formula over `variables`: a tree of &, |, ! with
/// at most `atoms` atoms of the form c*v op d, c in {1,-1,2}, d a two-decimal
/// constant in [0,1], op one of <, <=, =, >=, >.
Constraint random_constraint(SplitMix64& rng, const std::vector<std::string>& variables, std::size_t atoms);

/// SplitMix64 with portable bounded draws.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  /// Uniform in [lo, hi].
  std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi);

 private:
  std::uint64_t state_;
};

}  // namespace cbn
