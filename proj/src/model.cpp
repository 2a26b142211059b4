#include "cbn/model.hpp"

#include <fstream>
#include <sstream>

#include "cbn/polynomial.hpp"
#include "json.hpp"

namespace cbn {

using json = nlohmann::ordered_json;

std::vector<std::string> ConstrainedBN::variables() const {
  std::set<std::string> all(x_vars.begin(), x_vars.end());
  all.insert(mp_vars.begin(), mp_vars.end());
  return {all.begin(), all.end()};
}

void check_marginal_spec(const BasicNetwork<Term>& b, const MarginalSpec& spec) {
  b.node(spec.target_node).state_index(spec.target_state);
  for (const auto& [node, state] : spec.evidence) {
    b.node(node).state_index(state);
    if (node == spec.target_node) throw ModelError("marginal target " + node + " is also observed");
  }
}

// ---------------------------------------------------------------------------
// Documents

namespace {

std::string row_key(const BasicNetwork<Term>& b, const NodeSpec& n, std::size_t row, std::size_t state) {
  auto cards = b.parent_cardinalities(n);
  std::vector<std::size_t> digits(cards.size());
  for (std::size_t i = cards.size(); i-- > 0;) {
    digits[i] = row % cards[i];
    row /= cards[i];
  }
  std::string key;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i) key += ',';
    key += b.node(n.parents[i]).states[digits[i]];
  }
  return key + "|" + n.states[state];
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string current;
  for (char c : text) {
    if (c == sep) {
      out.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  out.push_back(current);
  return out;
}

template <class T>
T expression(const json& value, const std::string& where, T (*parse)(std::string_view)) {
  if (!value.is_string()) throw ModelError(where + ": expected an expression string");
  try {
    return parse(value.get<std::string>());
  } catch (const ParseError& e) {
    throw ModelError(where + ": " + e.what());
  }
}

std::vector<std::string> string_list(const json& value, const std::string& where) {
  if (!value.is_array()) throw ModelError(where + ": expected a list of strings");
  std::vector<std::string> out;
  for (const auto& v : value) {
    if (!v.is_string()) throw ModelError(where + ": expected a list of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

const json& member(const json& object, const char* key, const std::string& where) {
  if (!object.is_object() || !object.contains(key)) throw ModelError(where + ": missing key '" + key + "'");
  return object.at(key);
}

}  // namespace

ConstrainedBN load_model(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ModelError(std::string("malformed model document: ") + e.what());
  }
  if (!doc.is_object()) throw ModelError("model document must be an object");
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (key != "nodes" && key != "variables" && key != "constraints" && key != "marginals")
      throw ModelError("unknown top-level key '" + key + "'");
  }

  ConstrainedBN b;
  const json& nodes = member(doc, "nodes", "model");
  if (!nodes.is_array()) throw ModelError("'nodes' must be a list");
  // First pass: names, states, parents; tables need the parents' states.
  for (const auto& n : nodes) {
    NodeSpec spec;
    const json& name = member(n, "name", "node");
    if (!name.is_string()) throw ModelError("node name must be a string");
    spec.name = name.get<std::string>();
    std::string where = "node " + spec.name;
    spec.states = string_list(member(n, "states", where), where + " states");
    spec.parents = n.contains("parents") ? string_list(n.at("parents"), where + " parents") : std::vector<std::string>{};
    b.nodes.push_back(std::move(spec));
  }
  {
    // Structure minus tables.
    BasicNetwork<Term> shape = b;
    for (auto& n : shape.nodes) n.table.assign(shape.row_count(n), std::vector<Term>(n.states.size()));
    shape.check_structure();
  }
  for (std::size_t i = 0; i < b.nodes.size(); ++i) {
    NodeSpec& spec = b.nodes[i];
    std::string where = "node " + spec.name;
    const json& table = member(nodes[i], "table", where);
    if (!table.is_object()) throw ModelError(where + ": table must be an object");
    std::size_t rows = b.row_count(spec);
    std::vector<std::vector<std::optional<Term>>> cells(rows, std::vector<std::optional<Term>>(spec.states.size()));
    for (const auto& [key, value] : table.items()) {
      auto bar = key.rfind('|');
      if (bar == std::string::npos) throw ModelError(where + ": table key '" + key + "' lacks '|'");
      std::string parent_part = key.substr(0, bar);
      std::vector<std::string> labels = parent_part.empty() ? std::vector<std::string>{} : split(parent_part, ',');
      if (labels.size() != spec.parents.size()) throw ModelError("table arity mismatch for node " + spec.name + " at key '" + key + "'");
      std::vector<std::size_t> digits;
      for (std::size_t p = 0; p < labels.size(); ++p) digits.push_back(b.node(spec.parents[p]).state_index(labels[p]));
      std::size_t row = b.row_index(spec, digits);
      std::size_t state = spec.state_index(key.substr(bar + 1));
      if (cells[row][state]) throw ModelError(where + ": duplicate table key '" + key + "'");
      cells[row][state] = expression<Term>(value, where + " table '" + key + "'", parse_term);
    }
    spec.table.assign(rows, {});
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t s = 0; s < spec.states.size(); ++s) {
        if (!cells[r][s]) throw ModelError("table arity mismatch for node " + spec.name + ": missing " + row_key(b, spec, r, s));
        spec.table[r].push_back(*cells[r][s]);
      }
  }

  if (doc.contains("variables")) {
    const json& vars = doc.at("variables");
    if (!vars.is_object()) throw ModelError("'variables' must be an object");
    for (const auto& [key, value] : vars.items()) {
      auto names = string_list(value, "variables." + key);
      if (key == "x") b.x_vars.insert(names.begin(), names.end());
      else if (key == "mp") b.mp_vars.insert(names.begin(), names.end());
      else throw ModelError("unknown variable kind '" + key + "'");
    }
  }
  for (const auto& v : b.x_vars)
    if (b.mp_vars.count(v)) throw ModelError("variable declared as both x and mp: " + v);

  if (doc.contains("constraints")) {
    const json& cs = doc.at("constraints");
    if (!cs.is_array()) throw ModelError("'constraints' must be a list");
    for (const auto& c : cs) b.constraints.push_back(expression<Constraint>(c, "constraint", parse_constraint));
  }
  for (const auto& c : b.constraints)
    for (const auto& v : c.variables())
      if (!b.declares(v)) throw ModelError("variable not in X: " + v);
  for (const auto& n : b.nodes)
    for (const auto& row : n.table)
      for (const auto& t : row)
        for (const auto& v : t.variables()) {
          if (b.mp_vars.count(v)) throw ModelError("marginal variable " + v + " used in table of node " + n.name);
          if (!b.x_vars.count(v)) throw ModelError("variable not in X: " + v);
        }

  if (doc.contains("marginals")) {
    const json& ms = doc.at("marginals");
    if (!ms.is_object()) throw ModelError("'marginals' must be an object");
    for (const auto& [mp, spec_doc] : ms.items()) {
      if (!b.mp_vars.count(mp)) throw ModelError("marginal " + mp + " is not declared in variables.mp");
      MarginalSpec spec;
      std::string where = "marginal " + mp;
      const json& node = member(spec_doc, "node", where);
      const json& state = member(spec_doc, "state", where);
      if (!node.is_string() || !state.is_string()) throw ModelError(where + ": node and state must be strings");
      spec.target_node = node.get<std::string>();
      spec.target_state = state.get<std::string>();
      if (spec_doc.contains("evidence")) {
        const json& ev = spec_doc.at("evidence");
        if (!ev.is_object()) throw ModelError(where + ": evidence must be an object");
        for (const auto& [en, es] : ev.items()) {
          if (!es.is_string()) throw ModelError(where + ": evidence states must be strings");
          spec.evidence[en] = es.get<std::string>();
        }
      }
      check_marginal_spec(b, spec);
      b.marginal_defs[mp] = std::move(spec);
    }
  }
  return b;
}

ConstrainedBN load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open model file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_model(buffer.str());
}

std::string save_model(const ConstrainedBN& b) {
  json doc = json::object();
  json nodes = json::array();
  for (const auto& n : b.nodes) {
    json node = json::object();
    node["name"] = n.name;
    node["states"] = n.states;
    node["parents"] = n.parents;
    json table = json::object();
    for (std::size_t r = 0; r < n.table.size(); ++r)
      for (std::size_t s = 0; s < n.states.size(); ++s) table[row_key(b, n, r, s)] = to_string(n.table[r][s]);
    node["table"] = std::move(table);
    nodes.push_back(std::move(node));
  }
  doc["nodes"] = std::move(nodes);
  doc["variables"] = {{"x", std::vector<std::string>(b.x_vars.begin(), b.x_vars.end())},
                      {"mp", std::vector<std::string>(b.mp_vars.begin(), b.mp_vars.end())}};
  json constraints = json::array();
  for (const auto& c : b.constraints) constraints.push_back(to_string(c));
  doc["constraints"] = std::move(constraints);
  json marginals = json::object();
  for (const auto& [mp, spec] : b.marginal_defs) {
    json evidence = json::object();
    for (const auto& [node, state] : spec.evidence) evidence[node] = state;
    marginals[mp] = {{"node", spec.target_node}, {"state", spec.target_state}, {"evidence", std::move(evidence)}};
  }
  doc["marginals"] = std::move(marginals);
  return doc.dump(2) + "\n";
}

void save_model_file(const ConstrainedBN& b, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ModelError("cannot write model file " + path.string());
  out << save_model(b);
}

// ---------------------------------------------------------------------------
// Well-formedness

namespace {

bool mentions_marginal(const Term& t, const std::set<std::string>& mp_vars) {
  for (const auto& v : t.variables())
    if (mp_vars.count(v)) return true;
  return false;
}

/// Marginal named by `side` when it has the shape mp or mp*t / t*mp; the
/// cofactor t is returned through `cofactor`.
std::optional<std::string> marginal_head(const Term& side, const std::set<std::string>& mp_vars, std::optional<Term>& cofactor) {
  if (side.is_var() && mp_vars.count(side.name())) {
    cofactor.reset();
    return side.name();
  }
  if (side.kind() == Term::Kind::Mul) {
    if (side.lhs().is_var() && mp_vars.count(side.lhs().name())) {
      cofactor = side.rhs();
      return side.lhs().name();
    }
    if (side.rhs().is_var() && mp_vars.count(side.rhs().name())) {
      cofactor = side.lhs();
      return side.rhs().name();
    }
  }
  return std::nullopt;
}

}  // namespace

std::vector<DefinitionCandidate> definition_candidates(const Constraint& c, const std::set<std::string>& mp_vars) {
  std::vector<DefinitionCandidate> out;
  if (c.kind() != Constraint::Kind::Eq) return out;
  const Term* sides[2] = {&c.left(), &c.right()};
  for (int i = 0; i < 2; ++i) {
    std::optional<Term> cofactor;
    auto mp = marginal_head(*sides[i], mp_vars, cofactor);
    if (!mp) continue;
    bool valid = !mentions_marginal(*sides[1 - i], mp_vars) && !(cofactor && mentions_marginal(*cofactor, mp_vars));
    bool duplicate = false;
    for (const auto& d : out) duplicate = duplicate || d.mp == *mp;
    if (!duplicate) out.push_back({*mp, valid});
  }
  return out;
}

Assignment resolve_marginals(const ConstrainedBN& b, Assignment a) {
  for (const auto& c : b.constraints)
    for (const auto& part : conjuncts(c)) {
      if (part.kind() != Constraint::Kind::Eq) continue;
      const Term* sides[2] = {&part.left(), &part.right()};
      for (int i = 0; i < 2; ++i) {
        std::optional<Term> cofactor;
        auto mp = marginal_head(*sides[i], b.mp_vars, cofactor);
        if (!mp || mentions_marginal(*sides[1 - i], b.mp_vars) || (cofactor && mentions_marginal(*cofactor, b.mp_vars)))
          continue;
        try {
          Rational value = evaluate(*sides[1 - i], a);
          if (cofactor) {
            Rational f = evaluate(*cofactor, a);
            if (f == 0) continue;
            value /= f;
          }
          a[*mp] = value;
        } catch (const EvaluationError&) {
        }
        break;
      }
    }
  return a;
}

std::vector<Violation> validate_well_formed(const ConstrainedBN& b) {
  std::vector<Violation> out;
  std::set<std::string> occurring;
  for (const auto& c : b.constraints) c.collect_variables(occurring);
  for (const auto& v : occurring)
    if (!b.declares(v)) out.push_back({v, "1(a): variable not in X"});
  for (const auto& v : b.variables())
    if (!occurring.count(v)) out.push_back({v, "1(a): declared variable does not occur in C"});
  for (const auto& v : b.x_vars)
    if (b.mp_vars.count(v)) out.push_back({v, "1(a): variable declared as both x and mp"});

  for (const auto& n : b.nodes)
    for (const auto& row : n.table)
      for (const auto& t : row)
        for (const auto& v : t.variables()) {
          if (b.mp_vars.count(v)) out.push_back({v, "table: MarginalVar in table of node " + n.name});
          else if (!b.x_vars.count(v)) out.push_back({v, "table: variable not in X_x in node " + n.name});
        }

  std::map<std::string, int> valid, invalid;
  for (const auto& c : b.constraints)
    for (const auto& conjunct : conjuncts(c))
      for (const auto& d : definition_candidates(conjunct, b.mp_vars)) ++(d.valid ? valid : invalid)[d.mp];
  for (const auto& mp : b.mp_vars) {
    if (valid[mp] > 1) out.push_back({mp, "1(b): multiple definitions"});
    else if (valid[mp] == 0 && invalid[mp] > 0) out.push_back({mp, "1(b): MarginalVar on right-hand side"});
    else if (valid[mp] == 0) out.push_back({mp, "1(b): missing definition"});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Concretization and soundness

ConcreteBN concretize(const ConstrainedBN& b, const Assignment& a) {
  for (const auto& x : b.x_vars)
    if (!a.count(x)) throw ModelError("assignment does not bind " + x);
  for (const auto& c : b.constraints) {
    bool bound = true;
    for (const auto& v : c.variables()) bound = bound && a.count(v);
    if (!bound) continue;
    bool ok = false;
    try {
      ok = holds(c, a);
    } catch (const EvaluationError&) {
      ok = false;
    }
    if (!ok) throw ModelError("constraint violated: " + to_string(c));
  }
  ConcreteBN out;
  for (const auto& n : b.nodes) {
    ConcreteNode cn{n.name, n.states, n.parents, {}};
    for (std::size_t r = 0; r < n.table.size(); ++r) {
      std::vector<Rational> row;
      Rational sum = 0;
      for (const auto& t : n.table[r]) {
        Rational v = evaluate(t, a);
        if (v < 0 || v > 1) throw ModelError("entry outside [0,1] in node " + n.name + ": " + to_string(t) + " = " + to_string(v));
        sum += v;
        row.push_back(v);
      }
      if (sum != 1) throw ModelError("row " + std::to_string(r) + " of node " + n.name + " sums to " + to_string(sum));
      cn.table.push_back(std::move(row));
    }
    out.nodes.push_back(std::move(cn));
  }
  return out;
}

SoundnessResult check_sound(const ConstrainedBN& b, DecisionProcedure& oracle) {
  SoundnessResult result;
  std::vector<Constraint> bad;
  const Term zero = Term::constant(0), one = Term::constant(1);
  for (const auto& n : b.nodes)
    for (const auto& row : n.table) {
      Term sum = row.front();
      for (std::size_t s = 1; s < row.size(); ++s) sum = Term::add(sum, row[s]);
      RationalFn sum_fn = to_rational_fn(sum);
      bool row_settled = sum_fn.is_polynomial() && sum_fn.num() == Polynomial(Rational(1));
      if (!row_settled) bad.push_back(Constraint::negate(Constraint::eq(sum, one)));
      bool entries_settled = true;
      for (const auto& t : row) {
        RationalFn f = to_rational_fn(t);
        if (f.is_polynomial() && f.num().is_constant()) {
          Rational v = f.num().constant_value();
          if (v < 0 || v > 1) bad.push_back(Constraint::truth());
          continue;
        }
        entries_settled = false;
        bad.push_back(Constraint::disj(Constraint::lt(t, zero), Constraint::gt(t, one)));
      }
      if (row_settled && entries_settled) ++result.rows_discharged;
    }
  if (bad.empty()) {
    result.status = Soundness::Sound;
    return result;
  }
  std::vector<Constraint> assertions = b.constraints;
  assertions.push_back(Constraint::disj(bad));
  Verdict v = oracle.check(b.variables(), assertions);
  switch (v.status) {
    case SatStatus::Unsat: result.status = Soundness::Sound; break;
    case SatStatus::Sat:
      result.status = Soundness::Unsound;
      result.witness = v.witness;
      break;
    case SatStatus::Unknown:
      result.status = Soundness::Unknown;
      result.reason = v.reason;
      break;
  }
  return result;
}

}  // namespace cbn
