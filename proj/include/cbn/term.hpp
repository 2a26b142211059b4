#pragma once

#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cbn/rational.hpp"

namespace cbn {

/// Probability variables (X_x) appear in tables and free-standing measures;
/// marginal variables (X_mp) denote marginal probabilities and are pinned by
/// a defining equation.
enum class VarKind { Prob, Marginal };

struct VarRef {
  std::string name;
  VarKind kind = VarKind::Prob;

  friend bool operator==(const VarRef&, const VarRef&) = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t position)
      : std::runtime_error(message + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Immutable arithmetic expression tree. Neg, Sub and Div are surface sugar
/// over the core constructors Const, Var, Add and Mul.
class Term {
 public:
  enum class Kind { Const, Var, Add, Mul, Neg, Sub, Div };

  Term();  // Const(0)

  static Term constant(Rational value);
  static Term var(std::string name);
  static Term add(Term lhs, Term rhs);
  static Term mul(Term lhs, Term rhs);
  static Term neg(Term operand);
  static Term sub(Term lhs, Term rhs);
  static Term div(Term lhs, Term rhs);

  Kind kind() const;
  const Rational& value() const;     // Const only
  const std::string& name() const;   // Var only
  const Term& lhs() const;           // binary nodes; Neg operand
  const Term& rhs() const;           // binary nodes

  bool is_const() const { return kind() == Kind::Const; }
  bool is_var() const { return kind() == Kind::Var; }
  bool has_div() const;

  /// Variables occurring in the term, sorted.
  std::set<std::string> variables() const;
  void collect_variables(std::set<std::string>& out) const;

  /// Replaces variables by terms (simultaneously).
  Term substitute(const std::map<std::string, Term, std::less<>>& replacements) const;
  Term rename(const std::map<std::string, std::string, std::less<>>& renames) const;

  friend bool operator==(const Term& a, const Term& b);
  friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }

 private:
  struct Node;
  explicit Term(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

Term operator+(const Term& a, const Term& b);
Term operator-(const Term& a, const Term& b);
Term operator*(const Term& a, const Term& b);
Term operator/(const Term& a, const Term& b);
Term operator-(const Term& a);

/// Quantifier-free constraint. True, Leq, Lt, Not and And are primitive;
/// Eq, Geq, Gt and Or are kept as surface nodes until to_core().
class Constraint {
 public:
  enum class Kind { True, Leq, Lt, Eq, Geq, Gt, Not, And, Or };

  Constraint();  // True

  static Constraint truth();
  static Constraint falsity();  // Not(True)
  static Constraint leq(Term a, Term b);
  static Constraint lt(Term a, Term b);
  static Constraint eq(Term a, Term b);
  static Constraint geq(Term a, Term b);
  static Constraint gt(Term a, Term b);
  static Constraint negate(Constraint c);
  static Constraint conj(Constraint a, Constraint b);
  static Constraint disj(Constraint a, Constraint b);
  static Constraint conj(const std::vector<Constraint>& parts);  // empty: true
  static Constraint disj(const std::vector<Constraint>& parts);  // empty: false

  Kind kind() const;
  bool is_atom() const;
  const Term& left() const;               // atoms
  const Term& right() const;              // atoms
  const Constraint& first() const;        // Not operand, And/Or lhs
  const Constraint& second() const;       // And/Or rhs

  std::set<std::string> variables() const;
  void collect_variables(std::set<std::string>& out) const;
  bool has_div() const;

  /// Rewrites every derived operator into True/Leq/Lt/Not/And.
  Constraint to_core() const;

  Constraint substitute(const std::map<std::string, Term, std::less<>>& replacements) const;
  Constraint rename(const std::map<std::string, std::string, std::less<>>& renames) const;

  friend bool operator==(const Constraint& a, const Constraint& b);
  friend bool operator!=(const Constraint& a, const Constraint& b) { return !(a == b); }

 private:
  struct Node;
  explicit Constraint(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Flattens nested top-level conjunctions.
std::vector<Constraint> conjuncts(const Constraint& c);

/// First-order query over constraints.
class Query {
 public:
  enum class Kind { Base, Exists, Not, And };

  static Query base(Constraint c);
  static Query exists(VarRef var, Query body);
  static Query negate(Query q);
  static Query conj(Query a, Query b);

  Kind kind() const;
  const Constraint& constraint() const;  // Base
  const VarRef& bound() const;           // Exists
  const Query& body() const;             // Exists, Not
  const Query& first() const;            // And
  const Query& second() const;           // And

  bool is_quantifier_free() const;
  /// Exists* Base.
  bool is_prenex_existential() const;
  /// Bound variables of the existential prefix, outermost first.
  std::vector<VarRef> prefix() const;
  /// Quantifier-free matrix of a prenex-existential query.
  Constraint matrix() const;

  friend bool operator==(const Query& a, const Query& b);

 private:
  struct Node;
  explicit Query(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

Term parse_term(std::string_view source);
Constraint parse_constraint(std::string_view source);
/// Accepts constraints plus `exists v: <query>`.
Query parse_query(std::string_view source);

std::string to_string(const Term& t);
std::string to_string(const Constraint& c);
std::string to_string(const Query& q);

/// Folds Neg(Const) and Div(Const, Const) into constants, the same folding
/// the parser applies to literals.
Term fold_literals(const Term& t);

Rational evaluate(const Term& t, const Assignment& a);
bool holds(const Constraint& c, const Assignment& a);
bool holds(const Query& q, const Assignment& a);

/// Amount by which an assignment violates a constraint: 0 when satisfied,
/// the largest absolute distance to satisfaction otherwise. Strict atoms
/// count equality as satisfied; Div terms with zero denominators yield
/// std::nullopt (undefined).
std::optional<Rational> violation(const Constraint& c, const Assignment& a);

}  // namespace cbn
