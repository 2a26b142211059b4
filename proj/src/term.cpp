#include "cbn/term.hpp"

#include <algorithm>
#include <sstream>

namespace cbn {

// ---------------------------------------------------------------------------
// Term

struct Term::Node {
  Kind kind;
  Rational value;
  std::string name;
  Term lhs;
  Term rhs;
};

Term::Term() {
  static const std::shared_ptr<const Node> zero = [] {
    auto node = std::shared_ptr<Node>(new Node{Kind::Const, Rational(0), {}, Term(nullptr), Term(nullptr)});
    return std::shared_ptr<const Node>(node);
  }();
  node_ = zero;
}

Term Term::constant(Rational value) {
  value.canonicalize();
  return Term(std::make_shared<const Node>(Node{Kind::Const, std::move(value), {}, Term(nullptr), Term(nullptr)}));
}

Term Term::var(std::string name) {
  return Term(std::make_shared<const Node>(Node{Kind::Var, Rational(0), std::move(name), Term(nullptr), Term(nullptr)}));
}

Term Term::add(Term lhs, Term rhs) {
  return Term(std::make_shared<const Node>(Node{Kind::Add, Rational(0), {}, std::move(lhs), std::move(rhs)}));
}

Term Term::mul(Term lhs, Term rhs) {
  return Term(std::make_shared<const Node>(Node{Kind::Mul, Rational(0), {}, std::move(lhs), std::move(rhs)}));
}

Term Term::neg(Term operand) {
  return Term(std::make_shared<const Node>(Node{Kind::Neg, Rational(0), {}, std::move(operand), Term(nullptr)}));
}

Term Term::sub(Term lhs, Term rhs) {
  return Term(std::make_shared<const Node>(Node{Kind::Sub, Rational(0), {}, std::move(lhs), std::move(rhs)}));
}

Term Term::div(Term lhs, Term rhs) {
  return Term(std::make_shared<const Node>(Node{Kind::Div, Rational(0), {}, std::move(lhs), std::move(rhs)}));
}

Term::Kind Term::kind() const { return node_->kind; }
const Rational& Term::value() const { return node_->value; }
const std::string& Term::name() const { return node_->name; }
const Term& Term::lhs() const { return node_->lhs; }
const Term& Term::rhs() const { return node_->rhs; }

bool Term::has_div() const {
  switch (kind()) {
    case Kind::Const:
    case Kind::Var:
      return false;
    case Kind::Div:
      return true;
    case Kind::Neg:
      return lhs().has_div();
    default:
      return lhs().has_div() || rhs().has_div();
  }
}

void Term::collect_variables(std::set<std::string>& out) const {
  switch (kind()) {
    case Kind::Const:
      return;
    case Kind::Var:
      out.insert(name());
      return;
    case Kind::Neg:
      lhs().collect_variables(out);
      return;
    default:
      lhs().collect_variables(out);
      rhs().collect_variables(out);
  }
}

std::set<std::string> Term::variables() const {
  std::set<std::string> out;
  collect_variables(out);
  return out;
}

Term Term::substitute(const std::map<std::string, Term, std::less<>>& replacements) const {
  switch (kind()) {
    case Kind::Const:
      return *this;
    case Kind::Var: {
      auto it = replacements.find(name());
      return it == replacements.end() ? *this : it->second;
    }
    case Kind::Neg:
      return neg(lhs().substitute(replacements));
    case Kind::Add:
      return add(lhs().substitute(replacements), rhs().substitute(replacements));
    case Kind::Mul:
      return mul(lhs().substitute(replacements), rhs().substitute(replacements));
    case Kind::Sub:
      return sub(lhs().substitute(replacements), rhs().substitute(replacements));
    case Kind::Div:
      return div(lhs().substitute(replacements), rhs().substitute(replacements));
  }
  return *this;
}

Term Term::rename(const std::map<std::string, std::string, std::less<>>& renames) const {
  std::map<std::string, Term, std::less<>> replacements;
  for (const auto& [from, to] : renames) replacements.emplace(from, var(to));
  return substitute(replacements);
}

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Term::Kind::Const:
      return a.value() == b.value();
    case Term::Kind::Var:
      return a.name() == b.name();
    case Term::Kind::Neg:
      return a.lhs() == b.lhs();
    default:
      return a.lhs() == b.lhs() && a.rhs() == b.rhs();
  }
}

Term operator+(const Term& a, const Term& b) { return Term::add(a, b); }
Term operator-(const Term& a, const Term& b) { return Term::sub(a, b); }
Term operator*(const Term& a, const Term& b) { return Term::mul(a, b); }
Term operator/(const Term& a, const Term& b) { return Term::div(a, b); }
Term operator-(const Term& a) { return Term::neg(a); }

Term fold_literals(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::Const:
    case Term::Kind::Var:
      return t;
    case Term::Kind::Neg: {
      Term inner = fold_literals(t.lhs());
      if (inner.is_const()) return Term::constant(-inner.value());
      return Term::neg(inner);
    }
    case Term::Kind::Div: {
      Term l = fold_literals(t.lhs());
      Term r = fold_literals(t.rhs());
      if (l.is_const() && r.is_const() && r.value() != 0) return Term::constant(l.value() / r.value());
      return Term::div(l, r);
    }
    case Term::Kind::Add:
      return Term::add(fold_literals(t.lhs()), fold_literals(t.rhs()));
    case Term::Kind::Mul:
      return Term::mul(fold_literals(t.lhs()), fold_literals(t.rhs()));
    case Term::Kind::Sub:
      return Term::sub(fold_literals(t.lhs()), fold_literals(t.rhs()));
  }
  return t;
}

Rational evaluate(const Term& t, const Assignment& a) {
  switch (t.kind()) {
    case Term::Kind::Const:
      return t.value();
    case Term::Kind::Var: {
      auto it = a.find(t.name());
      if (it == a.end()) throw EvaluationError("unbound variable: " + t.name());
      return it->second;
    }
    case Term::Kind::Add:
      return evaluate(t.lhs(), a) + evaluate(t.rhs(), a);
    case Term::Kind::Mul:
      return evaluate(t.lhs(), a) * evaluate(t.rhs(), a);
    case Term::Kind::Neg:
      return -evaluate(t.lhs(), a);
    case Term::Kind::Sub:
      return evaluate(t.lhs(), a) - evaluate(t.rhs(), a);
    case Term::Kind::Div: {
      Rational den = evaluate(t.rhs(), a);
      if (den == 0) throw EvaluationError("division by zero");
      return evaluate(t.lhs(), a) / den;
    }
  }
  return Rational(0);
}

// ---------------------------------------------------------------------------
// Constraint

struct Constraint::Node {
  Kind kind;
  Term left;
  Term right;
  Constraint first;
  Constraint second;
};

Constraint::Constraint() : Constraint(truth()) {}

Constraint Constraint::truth() {
  static const auto node = std::make_shared<const Node>(Node{Kind::True, Term(), Term(), Constraint(nullptr), Constraint(nullptr)});
  return Constraint(node);
}

Constraint Constraint::falsity() { return negate(truth()); }

Constraint Constraint::leq(Term a, Term b) {
  return Constraint(std::make_shared<const Node>(Node{Kind::Leq, std::move(a), std::move(b), Constraint(nullptr), Constraint(nullptr)}));
}
Constraint Constraint::lt(Term a, Term b) {
  return Constraint(std::make_shared<const Node>(Node{Kind::Lt, std::move(a), std::move(b), Constraint(nullptr), Constraint(nullptr)}));
}
Constraint Constraint::eq(Term a, Term b) {
  return Constraint(std::make_shared<const Node>(Node{Kind::Eq, std::move(a), std::move(b), Constraint(nullptr), Constraint(nullptr)}));
}
Constraint Constraint::geq(Term a, Term b) {
  return Constraint(std::make_shared<const Node>(Node{Kind::Geq, std::move(a), std::move(b), Constraint(nullptr), Constraint(nullptr)}));
}
Constraint Constraint::gt(Term a, Term b) {
  return Constraint(std::make_shared<const Node>(Node{Kind::Gt, std::move(a), std::move(b), Constraint(nullptr), Constraint(nullptr)}));
}
Constraint Constraint::negate(Constraint c) {
  return Constraint(std::make_shared<const Node>(Node{Kind::Not, Term(), Term(), std::move(c), Constraint(nullptr)}));
}
Constraint Constraint::conj(Constraint a, Constraint b) {
  return Constraint(std::make_shared<const Node>(Node{Kind::And, Term(), Term(), std::move(a), std::move(b)}));
}
Constraint Constraint::disj(Constraint a, Constraint b) {
  return Constraint(std::make_shared<const Node>(Node{Kind::Or, Term(), Term(), std::move(a), std::move(b)}));
}
Constraint Constraint::conj(const std::vector<Constraint>& parts) {
  if (parts.empty()) return truth();
  Constraint result = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) result = conj(result, parts[i]);
  return result;
}

Constraint Constraint::disj(const std::vector<Constraint>& parts) {
  if (parts.empty()) return falsity();
  Constraint result = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) result = disj(result, parts[i]);
  return result;
}

Constraint::Kind Constraint::kind() const { return node_->kind; }

bool Constraint::is_atom() const {
  switch (kind()) {
    case Kind::Leq:
    case Kind::Lt:
    case Kind::Eq:
    case Kind::Geq:
    case Kind::Gt:
      return true;
    default:
      return false;
  }
}

const Term& Constraint::left() const { return node_->left; }
const Term& Constraint::right() const { return node_->right; }

const Constraint& Constraint::first() const { return node_->first; }
const Constraint& Constraint::second() const { return node_->second; }

void Constraint::collect_variables(std::set<std::string>& out) const {
  if (is_atom()) {
    left().collect_variables(out);
    right().collect_variables(out);
    return;
  }
  switch (kind()) {
    case Kind::True:
      return;
    case Kind::Not:
      first().collect_variables(out);
      return;
    default:
      first().collect_variables(out);
      second().collect_variables(out);
  }
}

std::set<std::string> Constraint::variables() const {
  std::set<std::string> out;
  collect_variables(out);
  return out;
}

bool Constraint::has_div() const {
  if (is_atom()) return left().has_div() || right().has_div();
  switch (kind()) {
    case Kind::True:
      return false;
    case Kind::Not:
      return first().has_div();
    default:
      return first().has_div() || second().has_div();
  }
}

Constraint Constraint::to_core() const {
  switch (kind()) {
    case Kind::True:
    case Kind::Leq:
    case Kind::Lt:
      return *this;
    case Kind::Eq:
      return conj(leq(left(), right()), leq(right(), left()));
    case Kind::Geq:
      return leq(right(), left());
    case Kind::Gt:
      return lt(right(), left());
    case Kind::Not:
      return negate(first().to_core());
    case Kind::And:
      return conj(first().to_core(), second().to_core());
    case Kind::Or:
      return negate(conj(negate(first().to_core()), negate(second().to_core())));
  }
  return *this;
}

Constraint Constraint::substitute(const std::map<std::string, Term, std::less<>>& replacements) const {
  if (is_atom()) {
    return Constraint(std::make_shared<const Node>(
        Node{kind(), left().substitute(replacements), right().substitute(replacements), Constraint(nullptr),
             Constraint(nullptr)}));
  }
  switch (kind()) {
    case Kind::True:
      return *this;
    case Kind::Not:
      return negate(first().substitute(replacements));
    case Kind::And:
      return conj(first().substitute(replacements), second().substitute(replacements));
    default:
      return disj(first().substitute(replacements), second().substitute(replacements));
  }
}

Constraint Constraint::rename(const std::map<std::string, std::string, std::less<>>& renames) const {
  std::map<std::string, Term, std::less<>> replacements;
  for (const auto& [from, to] : renames) replacements.emplace(from, Term::var(to));
  return substitute(replacements);
}

bool operator==(const Constraint& a, const Constraint& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  if (a.is_atom()) return a.left() == b.left() && a.right() == b.right();
  switch (a.kind()) {
    case Constraint::Kind::True:
      return true;
    case Constraint::Kind::Not:
      return a.first() == b.first();
    default:
      return a.first() == b.first() && a.second() == b.second();
  }
}

std::vector<Constraint> conjuncts(const Constraint& c) {
  if (c.kind() != Constraint::Kind::And) return {c};
  auto out = conjuncts(c.first());
  auto rest = conjuncts(c.second());
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

bool holds(const Constraint& c, const Assignment& a) {
  switch (c.kind()) {
    case Constraint::Kind::True:
      return true;
    case Constraint::Kind::Leq:
      return evaluate(c.left(), a) <= evaluate(c.right(), a);
    case Constraint::Kind::Lt:
      return evaluate(c.left(), a) < evaluate(c.right(), a);
    case Constraint::Kind::Eq:
      return evaluate(c.left(), a) == evaluate(c.right(), a);
    case Constraint::Kind::Geq:
      return evaluate(c.left(), a) >= evaluate(c.right(), a);
    case Constraint::Kind::Gt:
      return evaluate(c.left(), a) > evaluate(c.right(), a);
    case Constraint::Kind::Not:
      return !holds(c.first(), a);
    case Constraint::Kind::And:
      return holds(c.first(), a) && holds(c.second(), a);
    case Constraint::Kind::Or:
      return holds(c.first(), a) || holds(c.second(), a);
  }
  return false;
}

namespace {

// Violation of c (negated when `positive` is false); nullopt = undefined.
std::optional<Rational> violation_impl(const Constraint& c, const Assignment& a, bool positive) {
  using K = Constraint::Kind;
  auto diff = [&](const Term& l, const Term& r) -> std::optional<Rational> {
    try {
      return evaluate(l, a) - evaluate(r, a);
    } catch (const EvaluationError&) {
      return std::nullopt;
    }
  };
  auto over = [](const std::optional<Rational>& d) -> std::optional<Rational> {
    if (!d) return std::nullopt;
    return *d > 0 ? *d : Rational(0);
  };
  switch (c.kind()) {
    case K::True:
      // Falsity cannot be repaired by moving values.
      if (positive) return Rational(0);
      return std::nullopt;
    case K::Leq:
    case K::Lt: {
      auto d = diff(c.left(), c.right());
      if (!d) return std::nullopt;
      return positive ? over(d) : over(Rational(-*d));
    }
    case K::Geq:
    case K::Gt: {
      auto d = diff(c.right(), c.left());
      if (!d) return std::nullopt;
      return positive ? over(d) : over(Rational(-*d));
    }
    case K::Eq: {
      auto d = diff(c.left(), c.right());
      if (!d) return std::nullopt;
      if (positive) return abs(*d);
      // Disequality: satisfied unless exactly equal; residual 0 by convention.
      return Rational(0);
    }
    case K::Not:
      return violation_impl(c.first(), a, !positive);
    case K::And:
    case K::Or: {
      bool is_conj = (c.kind() == K::And) == positive;
      auto l = violation_impl(c.first(), a, positive);
      auto r = violation_impl(c.second(), a, positive);
      if (is_conj) {
        if (!l || !r) return std::nullopt;
        return std::max(*l, *r);
      }
      if (!l) return r;
      if (!r) return l;
      return std::min(*l, *r);
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<Rational> violation(const Constraint& c, const Assignment& a) {
  return violation_impl(c, a, true);
}

// ---------------------------------------------------------------------------
// Query

struct Query::Node {
  Kind kind;
  Constraint constraint;
  VarRef bound;
  Query first;
  Query second;
};

Query Query::base(Constraint c) {
  return Query(std::make_shared<const Node>(Node{Kind::Base, std::move(c), {}, Query(nullptr), Query(nullptr)}));
}
Query Query::exists(VarRef var, Query body) {
  return Query(std::make_shared<const Node>(Node{Kind::Exists, Constraint(), std::move(var), std::move(body), Query(nullptr)}));
}
Query Query::negate(Query q) {
  return Query(std::make_shared<const Node>(Node{Kind::Not, Constraint(), {}, std::move(q), Query(nullptr)}));
}
Query Query::conj(Query a, Query b) {
  return Query(std::make_shared<const Node>(Node{Kind::And, Constraint(), {}, std::move(a), std::move(b)}));
}

Query::Kind Query::kind() const { return node_->kind; }
const Constraint& Query::constraint() const { return node_->constraint; }
const VarRef& Query::bound() const { return node_->bound; }
const Query& Query::body() const { return node_->first; }
const Query& Query::first() const { return node_->first; }
const Query& Query::second() const { return node_->second; }

bool Query::is_quantifier_free() const {
  switch (kind()) {
    case Kind::Base:
      return true;
    case Kind::Exists:
      return false;
    case Kind::Not:
      return body().is_quantifier_free();
    case Kind::And:
      return first().is_quantifier_free() && second().is_quantifier_free();
  }
  return false;
}

bool Query::is_prenex_existential() const {
  const Query* q = this;
  while (q->kind() == Kind::Exists) q = &q->body();
  return q->is_quantifier_free();
}

std::vector<VarRef> Query::prefix() const {
  std::vector<VarRef> out;
  const Query* q = this;
  while (q->kind() == Kind::Exists) {
    out.push_back(q->bound());
    q = &q->body();
  }
  return out;
}

namespace {

Constraint query_to_constraint(const Query& q) {
  switch (q.kind()) {
    case Query::Kind::Base:
      return q.constraint();
    case Query::Kind::Not:
      return Constraint::negate(query_to_constraint(q.body()));
    case Query::Kind::And:
      return Constraint::conj(query_to_constraint(q.first()), query_to_constraint(q.second()));
    case Query::Kind::Exists:
      break;
  }
  throw std::logic_error("query is not quantifier-free");
}

}  // namespace

Constraint Query::matrix() const {
  const Query* q = this;
  while (q->kind() == Kind::Exists) q = &q->body();
  return query_to_constraint(*q);
}

bool operator==(const Query& a, const Query& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Query::Kind::Base:
      return a.constraint() == b.constraint();
    case Query::Kind::Exists:
      return a.bound() == b.bound() && a.body() == b.body();
    case Query::Kind::Not:
      return a.body() == b.body();
    case Query::Kind::And:
      return a.first() == b.first() && a.second() == b.second();
  }
  return false;
}

bool holds(const Query& q, const Assignment& a) {
  switch (q.kind()) {
    case Query::Kind::Base:
      return holds(q.constraint(), a);
    case Query::Kind::Not:
      return !holds(q.body(), a);
    case Query::Kind::And:
      return holds(q.first(), a) && holds(q.second(), a);
    case Query::Kind::Exists:
      break;
  }
  throw EvaluationError("cannot evaluate a quantified query under a fixed assignment");
}

}  // namespace cbn
