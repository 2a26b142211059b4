#include "cbn/inference.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

namespace cbn {

// ---------------------------------------------------------------------------
// Enumeration oracle

JointDistribution enumerate_joint(const ConcreteBN& b, std::size_t cap) {
  JointDistribution out;
  std::size_t total = 1;
  for (const auto& n : b.nodes) {
    out.nodes.push_back(n.name);
    out.states.push_back(n.states);
    if (total > cap / n.states.size()) throw CapExceeded("joint state space exceeds cap " + std::to_string(cap), total);
    total *= n.states.size();
  }
  std::vector<std::vector<std::size_t>> parent_index(b.nodes.size());
  for (std::size_t i = 0; i < b.nodes.size(); ++i)
    for (const auto& p : b.nodes[i].parents) parent_index[i].push_back(b.index_of(p));

  std::vector<std::size_t> config(b.nodes.size(), 0);
  for (std::size_t k = 0; k < total; ++k) {
    Rational prob = 1;
    for (std::size_t i = 0; i < b.nodes.size() && prob != 0; ++i) {
      std::vector<std::size_t> parents;
      for (auto pi : parent_index[i]) parents.push_back(config[pi]);
      prob *= b.nodes[i].table[b.row_index(b.nodes[i], parents)][config[i]];
    }
    if (prob != 0) out.p.emplace(config, prob);
    for (std::size_t i = config.size(); i-- > 0;) {
      if (++config[i] < b.nodes[i].states.size()) break;
      config[i] = 0;
    }
  }
  return out;
}

Rational query_joint(const JointDistribution& joint, const MarginalSpec& spec) {
  auto locate = [&](const std::string& node, const std::string& state) {
    auto it = std::find(joint.nodes.begin(), joint.nodes.end(), node);
    if (it == joint.nodes.end()) throw ModelError("unknown node: " + node);
    auto i = static_cast<std::size_t>(it - joint.nodes.begin());
    auto s = std::find(joint.states[i].begin(), joint.states[i].end(), state);
    if (s == joint.states[i].end()) throw ModelError("node " + node + " has no state " + state);
    return std::pair{i, static_cast<std::size_t>(s - joint.states[i].begin())};
  };
  auto target = locate(spec.target_node, spec.target_state);
  std::vector<std::pair<std::size_t, std::size_t>> evidence;
  for (const auto& [n, s] : spec.evidence) evidence.push_back(locate(n, s));

  Rational numerator = 0, denominator = 0;
  for (const auto& [config, prob] : joint.p) {
    bool matches = std::all_of(evidence.begin(), evidence.end(), [&](const auto& e) { return config[e.first] == e.second; });
    if (!matches) continue;
    denominator += prob;
    if (config[target.first] == target.second) numerator += prob;
  }
  if (evidence.empty()) return numerator;
  if (denominator == 0) throw ModelError("zero-probability evidence");
  return numerator / denominator;
}

// ---------------------------------------------------------------------------
// Graphs

UndirectedGraph moralize(const BasicNetwork<Term>& b) {
  UndirectedGraph g;
  for (const auto& n : b.nodes) g.names.push_back(n.name);
  g.adjacent.resize(b.nodes.size());
  auto link = [&](std::size_t a, std::size_t c) {
    if (a == c) return;
    g.adjacent[a].insert(c);
    g.adjacent[c].insert(a);
  };
  for (std::size_t i = 0; i < b.nodes.size(); ++i) {
    std::vector<std::size_t> parents;
    for (const auto& p : b.nodes[i].parents) parents.push_back(b.index_of(p));
    for (std::size_t a = 0; a < parents.size(); ++a) {
      link(i, parents[a]);
      for (std::size_t c = a + 1; c < parents.size(); ++c) link(parents[a], parents[c]);
    }
  }
  return g;
}

Triangulation triangulate(const UndirectedGraph& g) {
  Triangulation out;
  std::vector<std::set<std::size_t>> adj = g.adjacent;
  std::vector<bool> eliminated(g.names.size(), false);
  std::vector<std::set<std::size_t>> elimination_cliques;

  for (std::size_t step = 0; step < g.names.size(); ++step) {
    std::size_t best = g.names.size();
    std::size_t best_fill = 0;
    for (std::size_t v = 0; v < g.names.size(); ++v) {
      if (eliminated[v]) continue;
      std::vector<std::size_t> nbrs(adj[v].begin(), adj[v].end());
      std::size_t fill = 0;
      for (std::size_t a = 0; a < nbrs.size(); ++a)
        for (std::size_t c = a + 1; c < nbrs.size(); ++c)
          if (!adj[nbrs[a]].count(nbrs[c])) ++fill;
      if (best == g.names.size() || fill < best_fill || (fill == best_fill && g.names[v] < g.names[best])) {
        best = v;
        best_fill = fill;
      }
    }
    std::vector<std::size_t> nbrs(adj[best].begin(), adj[best].end());
    for (std::size_t a = 0; a < nbrs.size(); ++a)
      for (std::size_t c = a + 1; c < nbrs.size(); ++c)
        if (!adj[nbrs[a]].count(nbrs[c])) {
          adj[nbrs[a]].insert(nbrs[c]);
          adj[nbrs[c]].insert(nbrs[a]);
          out.fill_in.emplace_back(std::min(nbrs[a], nbrs[c]), std::max(nbrs[a], nbrs[c]));
        }
    std::set<std::size_t> clique(nbrs.begin(), nbrs.end());
    clique.insert(best);
    elimination_cliques.push_back(std::move(clique));
    for (auto n : nbrs) adj[n].erase(best);
    adj[best].clear();
    eliminated[best] = true;
    out.order.push_back(best);
  }

  for (std::size_t i = 0; i < elimination_cliques.size(); ++i) {
    const auto& c = elimination_cliques[i];
    bool contained = false;
    for (std::size_t j = 0; j < elimination_cliques.size() && !contained; ++j) {
      if (i == j) continue;
      const auto& d = elimination_cliques[j];
      bool subset = std::includes(d.begin(), d.end(), c.begin(), c.end());
      // Equal cliques: keep the first occurrence only.
      contained = subset && (d.size() > c.size() || j < i);
    }
    if (!contained) out.cliques.push_back(c);
  }
  return out;
}

std::set<std::size_t> JunctionTree::separator(std::size_t edge) const {
  const auto& a = cliques[edges[edge].first];
  const auto& b = cliques[edges[edge].second];
  std::set<std::size_t> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

bool JunctionTree::has_running_intersection() const {
  std::vector<std::vector<std::size_t>> nbrs(cliques.size());
  for (const auto& [a, b] : edges) {
    nbrs[a].push_back(b);
    nbrs[b].push_back(a);
  }
  // For every node, the cliques containing it must induce a connected subtree.
  std::set<std::size_t> all_nodes;
  for (const auto& c : cliques) all_nodes.insert(c.begin(), c.end());
  for (auto node : all_nodes) {
    std::vector<std::size_t> holders;
    for (std::size_t i = 0; i < cliques.size(); ++i)
      if (cliques[i].count(node)) holders.push_back(i);
    std::vector<bool> seen(cliques.size(), false);
    std::vector<std::size_t> stack{holders.front()};
    seen[holders.front()] = true;
    std::size_t reached = 0;
    while (!stack.empty()) {
      auto c = stack.back();
      stack.pop_back();
      ++reached;
      for (auto n : nbrs[c])
        if (!seen[n] && cliques[n].count(node)) {
          seen[n] = true;
          stack.push_back(n);
        }
    }
    if (reached != holders.size()) return false;
  }
  return edges.size() + 1 == cliques.size() || cliques.empty();
}

JunctionTree build_junction_tree(const std::vector<std::set<std::size_t>>& cliques) {
  JunctionTree tree;
  tree.cliques = cliques;
  struct Candidate {
    std::size_t weight, a, b;
  };
  std::vector<Candidate> candidates;
  for (std::size_t a = 0; a < cliques.size(); ++a)
    for (std::size_t b = a + 1; b < cliques.size(); ++b) {
      std::size_t w = 0;
      for (auto n : cliques[a]) w += cliques[b].count(n);
      candidates.push_back({w, a, b});
    }
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) { return x.weight > y.weight; });
  std::vector<std::size_t> parent(cliques.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (const auto& c : candidates) {
    auto ra = find(c.a), rb = find(c.b);
    if (ra == rb) continue;
    parent[ra] = rb;
    tree.edges.emplace_back(c.a, c.b);
  }
  return tree;
}

// ---------------------------------------------------------------------------
// Potentials

namespace {

Potential make_potential(std::vector<std::size_t> nodes, const BasicNetwork<Term>& b) {
  Potential p;
  p.nodes = std::move(nodes);
  std::size_t size = 1;
  for (auto n : p.nodes) {
    p.cards.push_back(b.nodes[n].states.size());
    size *= p.cards.back();
  }
  p.values.assign(size, Polynomial(Rational(1)));
  return p;
}

/// For each entry of `big`, the index of the matching entry of a potential
/// over `small_nodes` (a subset of big.nodes).
std::vector<std::size_t> projection(const Potential& big, const std::vector<std::size_t>& small_nodes,
                                    const std::vector<std::size_t>& small_cards) {
  std::vector<std::size_t> stride(big.nodes.size(), 0);
  std::size_t s = 1;
  for (std::size_t k = small_nodes.size(); k-- > 0;) {
    auto pos = static_cast<std::size_t>(std::find(big.nodes.begin(), big.nodes.end(), small_nodes[k]) - big.nodes.begin());
    stride[pos] = s;
    s *= small_cards[k];
  }
  std::vector<std::size_t> out(big.size());
  std::vector<std::size_t> digit(big.nodes.size(), 0);
  std::size_t index = 0;
  for (std::size_t e = 0; e < big.size(); ++e) {
    out[e] = index;
    for (std::size_t i = big.nodes.size(); i-- > 0;) {
      if (++digit[i] < big.cards[i]) {
        index += stride[i];
        break;
      }
      index -= stride[i] * (big.cards[i] - 1);
      digit[i] = 0;
    }
  }
  return out;
}

void multiply_into(Potential& target, const Potential& factor) {
  auto map = projection(target, factor.nodes, factor.cards);
  for (std::size_t e = 0; e < target.size(); ++e) {
    if (target.values[e].is_zero()) continue;
    target.values[e] *= factor.values[map[e]];
  }
}

Potential sum_to(const Potential& p, const std::vector<std::size_t>& keep, const BasicNetwork<Term>& b) {
  Potential out = make_potential(keep, b);
  for (auto& v : out.values) v = Polynomial();
  auto map = projection(p, out.nodes, out.cards);
  for (std::size_t e = 0; e < p.size(); ++e)
    if (!p.values[e].is_zero()) out.values[map[e]] += p.values[e];
  return out;
}

std::vector<std::size_t> sorted(const std::set<std::size_t>& s) { return {s.begin(), s.end()}; }

/// Family potential of node i: its table with the evidence indicator applied.
Potential family_potential(const BasicNetwork<Term>& b, std::size_t i, const std::map<std::size_t, std::size_t>& evidence) {
  const auto& node = b.nodes[i];
  std::vector<std::size_t> parents;
  for (const auto& p : node.parents) parents.push_back(b.index_of(p));
  std::set<std::size_t> family(parents.begin(), parents.end());
  family.insert(i);
  Potential pot = make_potential(sorted(family), b);
  std::vector<std::size_t> digit(pot.nodes.size(), 0);
  auto observed = evidence.find(i);
  for (std::size_t e = 0; e < pot.size(); ++e) {
    std::vector<std::size_t> parent_states;
    std::size_t own = 0;
    for (auto pn : parents)
      parent_states.push_back(digit[static_cast<std::size_t>(std::find(pot.nodes.begin(), pot.nodes.end(), pn) - pot.nodes.begin())]);
    own = digit[static_cast<std::size_t>(std::find(pot.nodes.begin(), pot.nodes.end(), i) - pot.nodes.begin())];
    if (observed != evidence.end() && observed->second != own) {
      pot.values[e] = Polynomial();
    } else {
      pot.values[e] = to_rational_fn(node.table[b.row_index(node, parent_states)][own]).num();
    }
    for (std::size_t k = pot.nodes.size(); k-- > 0;) {
      if (++digit[k] < pot.cards[k]) break;
      digit[k] = 0;
    }
  }
  return pot;
}

}  // namespace

CompiledNetwork compile(const ConstrainedBN& b, const std::map<std::string, std::string>& evidence,
                        const InferenceOptions& options) {
  for (const auto& n : b.nodes)
    for (const auto& row : n.table)
      for (const auto& t : row)
        if (!to_rational_fn(t).is_polynomial()) throw ModelError("table entry of node " + n.name + " is not polynomial: " + to_string(t));

  CompiledNetwork net;
  net.moral = moralize(b);
  net.triangulation = triangulate(net.moral);
  net.tree = build_junction_tree(net.triangulation.cliques);

  for (const auto& c : net.tree.cliques) {
    std::size_t size = 1;
    std::string names;
    for (auto n : c) {
      size = size > options.clique_cap ? size : size * b.nodes[n].states.size();
      names += (names.empty() ? "" : ",") + b.nodes[n].name;
    }
    net.largest_clique = std::max(net.largest_clique, size);
    if (size > options.clique_cap)
      throw CapExceeded("clique {" + names + "} needs more than " + std::to_string(options.clique_cap) + " entries", size);
  }

  std::map<std::size_t, std::size_t> observed;
  for (const auto& [node, state] : evidence) observed[b.index_of(node)] = b.node(node).state_index(state);

  for (const auto& c : net.tree.cliques) net.potentials.push_back(make_potential(sorted(c), b));
  for (std::size_t i = 0; i < b.nodes.size(); ++i) {
    std::set<std::size_t> family{i};
    for (const auto& p : b.nodes[i].parents) family.insert(b.index_of(p));
    std::size_t home = net.tree.cliques.size();
    for (std::size_t c = 0; c < net.tree.cliques.size() && home == net.tree.cliques.size(); ++c)
      if (std::includes(net.tree.cliques[c].begin(), net.tree.cliques[c].end(), family.begin(), family.end())) home = c;
    if (home == net.tree.cliques.size()) throw std::logic_error("family of " + b.nodes[i].name + " is in no clique");
    multiply_into(net.potentials[home], family_potential(b, i, observed));
  }
  return net;
}

namespace {

struct MessagePassing {
  const CompiledNetwork& net;
  const BasicNetwork<Term>& shape;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> nbrs;  // (clique, edge)
  std::map<std::pair<std::size_t, std::size_t>, Potential> messages;   // (from, to)

  MessagePassing(const CompiledNetwork& n, const BasicNetwork<Term>& s) : net(n), shape(s), nbrs(n.tree.cliques.size()) {
    for (std::size_t e = 0; e < n.tree.edges.size(); ++e) {
      auto [a, b] = n.tree.edges[e];
      nbrs[a].emplace_back(b, e);
      nbrs[b].emplace_back(a, e);
    }
  }

  Potential product_except(std::size_t clique, std::size_t excluded) const {
    Potential p = net.potentials[clique];
    for (auto [other, edge] : nbrs[clique]) {
      (void)edge;
      if (other == excluded) continue;
      multiply_into(p, messages.at({other, clique}));
    }
    return p;
  }

  void send(std::size_t from, std::size_t to, std::size_t edge) {
    Potential p = product_except(from, to);
    messages[{from, to}] = sum_to(p, sorted(net.tree.separator(edge)), shape);
  }

  void collect_to(std::size_t node, std::size_t parent) {
    for (auto [child, edge] : nbrs[node]) {
      if (child == parent) continue;
      collect_to(child, node);
      send(child, node, edge);
    }
  }

  void distribute_from(std::size_t node, std::size_t parent) {
    for (auto [child, edge] : nbrs[node]) {
      if (child == parent) continue;
      send(node, child, edge);
      distribute_from(child, node);
    }
  }

  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
};

/// Clique shapes only matter through node cardinalities.
BasicNetwork<Term> shape_of(const CompiledNetwork& net, const std::vector<std::size_t>& cards) {
  BasicNetwork<Term> shape;
  for (std::size_t i = 0; i < net.moral.names.size(); ++i) {
    BasicNode<Term> n;
    n.name = net.moral.names[i];
    n.states.assign(cards[i], "");
    shape.nodes.push_back(std::move(n));
  }
  return shape;
}

std::vector<std::size_t> node_cards(const CompiledNetwork& net) {
  std::vector<std::size_t> cards(net.moral.names.size(), 1);
  for (const auto& p : net.potentials)
    for (std::size_t k = 0; k < p.nodes.size(); ++k) cards[p.nodes[k]] = p.cards[k];
  return cards;
}

}  // namespace

std::vector<Potential> propagate(const CompiledNetwork& net) {
  auto shape = shape_of(net, node_cards(net));
  MessagePassing mp(net, shape);
  // The tree is spanning, so clique 0 reaches every clique.
  if (!net.tree.cliques.empty()) {
    mp.collect_to(0, MessagePassing::kNone);
    mp.distribute_from(0, MessagePassing::kNone);
  }
  std::vector<Potential> beliefs;
  for (std::size_t c = 0; c < net.tree.cliques.size(); ++c) beliefs.push_back(mp.product_except(c, MessagePassing::kNone));
  return beliefs;
}

Potential collect(const CompiledNetwork& net, std::size_t root) {
  auto shape = shape_of(net, node_cards(net));
  MessagePassing mp(net, shape);
  mp.collect_to(root, MessagePassing::kNone);
  return mp.product_except(root, MessagePassing::kNone);
}

// ---------------------------------------------------------------------------
// Marginals

std::vector<Constraint> defining_constraints(const std::string& mp, const Polynomial& n, const Polynomial& d,
                                             bool denominator_guard) {
  RationalFn f(n, d);
  Term var = Term::var(mp);
  if (f.is_polynomial()) return {Constraint::eq(var, f.num().to_term())};
  std::vector<Constraint> out{Constraint::eq(Term::mul(var, d.to_term()), n.to_term())};
  if (denominator_guard) out.push_back(Constraint::gt(d.to_term(), Term::constant(0)));
  return out;
}

MarginalDefinition symbolic_marginal(const ConstrainedBN& b, const MarginalSpec& spec, const std::string& mp,
                                     const InferenceOptions& options) {
  check_marginal_spec(b, spec);
  CompiledNetwork net = compile(b, spec.evidence, options);
  std::size_t target = b.index_of(spec.target_node);
  std::size_t target_state = b.node(spec.target_node).state_index(spec.target_state);

  // Smallest clique holding the target.
  std::size_t root = net.tree.cliques.size();
  for (std::size_t c = 0; c < net.tree.cliques.size(); ++c)
    if (net.tree.cliques[c].count(target) && (root == net.tree.cliques.size() || net.potentials[c].size() < net.potentials[root].size()))
      root = c;
  Potential belief = collect(net, root);

  auto pos = static_cast<std::size_t>(std::find(belief.nodes.begin(), belief.nodes.end(), target) - belief.nodes.begin());
  std::size_t stride = 1;
  for (std::size_t k = belief.nodes.size(); k-- > pos + 1;) stride *= belief.cards[k];

  Polynomial numerator, total;
  for (std::size_t e = 0; e < belief.size(); ++e) {
    if (belief.values[e].is_zero()) continue;
    if ((e / stride) % belief.cards[pos] == target_state) numerator += belief.values[e];
    if (!spec.evidence.empty()) total += belief.values[e];
  }

  MarginalDefinition def;
  def.mp = mp;
  def.largest_clique = net.largest_clique;
  if (spec.evidence.empty()) {
    def.numerator = numerator;
    def.denominator = Polynomial(Rational(1));
  } else {
    if (total.is_zero()) throw ModelError("evidence has probability zero for every assignment");
    RationalFn f(numerator, total);
    def.numerator = f.num();
    def.denominator = f.den();
  }
  def.constraints = defining_constraints(mp, def.numerator, def.denominator, options.denominator_guard);
  return def;
}

ConstrainedBN install_marginal(const ConstrainedBN& b, const MarginalSpec& spec, const std::string& name,
                               const InferenceOptions& options) {
  if (b.declares(name)) throw ModelError("name collision: " + name);
  MarginalDefinition def = symbolic_marginal(b, spec, name, options);
  ConstrainedBN out = b;
  out.mp_vars.insert(name);
  out.constraints.insert(out.constraints.end(), def.constraints.begin(), def.constraints.end());
  out.marginal_defs[name] = spec;
  return out;
}

std::vector<std::string> ensure_marginal_definitions(ConstrainedBN& b, const InferenceOptions& options) {
  std::set<std::string> defined;
  for (const auto& c : b.constraints)
    for (const auto& conjunct : conjuncts(c))
      for (const auto& d : definition_candidates(conjunct, b.mp_vars))
        if (d.valid) defined.insert(d.mp);
  std::vector<std::string> generated;
  for (const auto& [mp, spec] : b.marginal_defs) {
    if (defined.count(mp)) continue;
    MarginalDefinition def = symbolic_marginal(b, spec, mp, options);
    b.constraints.insert(b.constraints.end(), def.constraints.begin(), def.constraints.end());
    generated.push_back(mp);
  }
  return generated;
}

}  // namespace cbn
