#include "cbn/generate.hpp"

#include <algorithm>
#include <set>

namespace cbn {

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t SplitMix64::uniform(std::uint64_t lo, std::uint64_t hi) {
  std::uint64_t span = hi - lo + 1;
  if (span == 0) return next();
  std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t v;
  do {
    v = next();
  } while (v >= limit);
  return lo + v % span;
}

namespace {

/// k positive multiples of 0.01 summing to 1.
std::vector<Term> constant_row(SplitMix64& rng, std::size_t k) {
  std::set<std::uint64_t> cuts;
  while (cuts.size() + 1 < k) cuts.insert(rng.uniform(1, 99));
  std::vector<Term> row;
  std::uint64_t previous = 0;
  for (auto c : cuts) {
    row.push_back(Term::constant(Rational(static_cast<long>(c - previous), 100)));
    previous = c;
  }
  row.push_back(Term::constant(Rational(static_cast<long>(100 - previous), 100)));
  for (auto& t : row) {
    Rational v = t.value();
    v.canonicalize();
    t = Term::constant(v);
  }
  return row;
}

}  // namespace

GeneratedModel generate_random(std::uint64_t seed, const GeneratorOptions& options) {
  if (options.nodes == 0 || options.min_states == 0 || options.min_states > options.max_states || options.max_states > 100)
    throw ModelError("invalid generator options");
  SplitMix64 rng(seed);
  GeneratedModel out;
  ConstrainedBN& b = out.model;

  std::vector<std::string> vars;
  for (std::size_t v = 1; v <= options.x_vars; ++v) vars.push_back("x" + std::to_string(v));

  std::size_t evidence = static_cast<std::size_t>(rng.uniform(0, options.nodes - 1));
  for (std::size_t i = 0; i < options.nodes; ++i) {
    NodeSpec n;
    n.name = "N" + std::to_string(i);
    std::size_t k = static_cast<std::size_t>(rng.uniform(options.min_states, options.max_states));
    for (std::size_t s = 0; s < k; ++s) n.states.push_back("s" + std::to_string(s));
    std::size_t parent_count = i == 0 ? 0 : static_cast<std::size_t>(rng.uniform(0, std::min(options.max_parents, i)));
    std::set<std::size_t> parents;
    while (parents.size() < parent_count) parents.insert(static_cast<std::size_t>(rng.uniform(0, i - 1)));
    for (auto p : parents) n.parents.push_back(b.nodes[p].name);
    b.nodes.push_back(n);

    std::size_t rows = b.row_count(b.nodes.back());
    for (std::size_t r = 0; r < rows; ++r) {
      bool symbolic = k >= 2 && !vars.empty() && rng.uniform(0, 1) == 1;
      if (!symbolic) {
        b.nodes.back().table.push_back(constant_row(rng, k));
        continue;
      }
      Term x = Term::var(vars[static_cast<std::size_t>(rng.uniform(0, vars.size() - 1))]);
      Term complement = Term::sub(Term::constant(1), x);
      std::size_t first = i == evidence ? 0 : static_cast<std::size_t>(rng.uniform(0, k - 1));
      std::size_t second = first;
      while (second == first) second = static_cast<std::size_t>(rng.uniform(0, k - 1));
      std::vector<Term> row(k, Term::constant(0));
      bool swap = rng.uniform(0, 1) == 1;
      row[first] = swap ? complement : x;
      row[second] = swap ? x : complement;
      b.nodes.back().table.push_back(std::move(row));
    }
  }

  b.x_vars.insert(vars.begin(), vars.end());
  for (const auto& v : vars) {
    b.constraints.push_back(Constraint::leq(Term::constant(0), Term::var(v)));
    b.constraints.push_back(Constraint::leq(Term::var(v), Term::constant(1)));
  }

  MarginalSpec spec;
  if (options.nodes == 1) {
    spec.target_node = b.nodes[0].name;
  } else {
    std::size_t target = static_cast<std::size_t>(rng.uniform(0, options.nodes - 2));
    if (target >= evidence) ++target;
    spec.target_node = b.nodes[target].name;
    spec.evidence[b.nodes[evidence].name] = b.nodes[evidence].states[0];
  }
  spec.target_state = b.node(spec.target_node).states[0];
  out.suggested = spec;
  out.marginal_name = "mp_1";
  b.mp_vars.insert(out.marginal_name);
  b.marginal_defs[out.marginal_name] = spec;
  return out;
}

namespace {

Constraint random_atom(SplitMix64& rng, const std::vector<std::string>& variables) {
  static const long kScales[] = {1, -1, 2};
  Term v = Term::var(variables[static_cast<std::size_t>(rng.uniform(0, variables.size() - 1))]);
  long scale = kScales[rng.uniform(0, 2)];
  Term lhs = scale == 1 ? v : Term::mul(Term::constant(scale), v);
  Rational d(static_cast<long>(rng.uniform(0, 100)), 100);
  d.canonicalize();
  Term rhs = Term::constant(scale < 0 ? Rational(-d) : d);
  switch (rng.uniform(0, 4)) {
    case 0: return Constraint::lt(lhs, rhs);
    case 1: return Constraint::leq(lhs, rhs);
    case 2: return Constraint::eq(lhs, rhs);
    case 3: return Constraint::geq(lhs, rhs);
    default: return Constraint::gt(lhs, rhs);
  }
}

}  // namespace

Constraint random_constraint(SplitMix64& rng, const std::vector<std::string>& variables, std::size_t atoms) {
  if (variables.empty() || atoms <= 1) return variables.empty() ? Constraint::truth() : random_atom(rng, variables);
  switch (rng.uniform(0, 3)) {
    case 0: return Constraint::negate(random_constraint(rng, variables, atoms));
    case 1: return random_atom(rng, variables);
    default: {
      std::size_t left = static_cast<std::size_t>(rng.uniform(1, atoms - 1));
      Constraint a = random_constraint(rng, variables, left);
      Constraint b = random_constraint(rng, variables, atoms - left);
      return rng.uniform(0, 1) == 0 ? Constraint::conj(a, b) : Constraint::disj(a, b);
    }
  }
}

}  // namespace cbn
