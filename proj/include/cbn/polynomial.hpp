#pragma once

#include <map>
#include <string>
#include <vector>

#include "cbn/rational.hpp"
#include "cbn/term.hpp"

namespace cbn {

/// Sparse multivariate polynomial with exact rational coefficients.
///
/// Exponent vectors are indexed by variables(), which is sorted by name and
/// holds exactly the variables with a nonzero exponent somewhere. No zero
/// coefficient is ever stored; the zero polynomial has no terms.
class Polynomial {
 public:
  using Exponents = std::vector<unsigned>;

  /// Graded order, highest total degree first, then lexicographically
  /// descending exponent vectors.
  struct MonomialOrder {
    bool operator()(const Exponents& a, const Exponents& b) const;
  };
  using Terms = std::map<Exponents, Rational, MonomialOrder>;

  Polynomial() = default;
  explicit Polynomial(Rational constant);
  static Polynomial variable(const std::string& name);
  /// Builds from raw terms; drops zero coefficients and unused variables.
  static Polynomial from_terms(std::vector<std::string> variables, Terms terms);

  const std::vector<std::string>& variables() const { return vars_; }
  const Terms& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }

  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const { return vars_.empty(); }
  /// Value of a constant polynomial (0 for the zero polynomial).
  Rational constant_value() const;
  unsigned total_degree() const;
  unsigned degree_in(const std::string& name) const;

  /// Coefficient of the monomial given as name -> exponent (absent = 0).
  Rational coefficient(const std::map<std::string, unsigned, std::less<>>& monomial) const;

  Rational evaluate(const Assignment& a) const;
  Term to_term() const;

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(const Polynomial& other);
  Polynomial& operator*=(const Rational& scalar);

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(Polynomial a, const Rational& s) { return a *= s; }
  friend Polynomial operator-(Polynomial a) { return a *= Rational(-1); }

  Polynomial pow(unsigned exponent) const;

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.vars_ == b.vars_ && a.terms_ == b.terms_;
  }
  friend bool operator!=(const Polynomial& a, const Polynomial& b) { return !(a == b); }

 private:
  Terms aligned_to(const std::vector<std::string>& target) const;
  void trim();

  std::vector<std::string> vars_;
  Terms terms_;
};

std::string to_string(const Polynomial& p);

/// num/den with den nonzero; a constant den is scaled into num and becomes 1.
/// No gcd cancellation beyond that.
class RationalFn {
 public:
  RationalFn() : den_(Rational(1)) {}
  RationalFn(Polynomial num);  // NOLINT: polynomials are rational functions
  RationalFn(Polynomial num, Polynomial den);

  const Polynomial& num() const { return num_; }
  const Polynomial& den() const { return den_; }
  bool is_polynomial() const { return den_.is_constant(); }

  /// Throws EvaluationError when den vanishes at a.
  Rational evaluate(const Assignment& a) const;
  /// num, or Div(num, den) when den is not constant.
  Term to_term() const;

  friend RationalFn operator+(const RationalFn& a, const RationalFn& b);
  friend RationalFn operator-(const RationalFn& a, const RationalFn& b);
  friend RationalFn operator*(const RationalFn& a, const RationalFn& b);
  /// Throws EvaluationError if b is identically zero.
  friend RationalFn operator/(const RationalFn& a, const RationalFn& b);
  friend RationalFn operator-(const RationalFn& a);

  friend bool operator==(const RationalFn& a, const RationalFn& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }

 private:
  Polynomial num_;
  Polynomial den_;
};

/// Normal form of a term. Throws EvaluationError on division by a
/// polynomial that is identically zero.
RationalFn to_rational_fn(const Term& t);

/// Round trip through the normal form.
Term simplify(const Term& t);

}  // namespace cbn
