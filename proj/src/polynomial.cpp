#include "cbn/polynomial.hpp"

#include <algorithm>
#include <numeric>

namespace cbn {

namespace {

unsigned degree(const Polynomial::Exponents& e) { return std::accumulate(e.begin(), e.end(), 0u); }

std::vector<std::string> merge_names(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::string> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

void accumulate_into(Polynomial::Terms& terms, const Polynomial::Exponents& e, const Rational& c) {
  auto [it, inserted] = terms.try_emplace(e, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms.erase(it);
  }
}

}  // namespace

bool Polynomial::MonomialOrder::operator()(const Exponents& a, const Exponents& b) const {
  unsigned da = degree(a), db = degree(b);
  if (da != db) return da > db;
  return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

Polynomial::Polynomial(Rational constant) {
  if (constant != 0) terms_.emplace(Exponents{}, std::move(constant));
}

Polynomial Polynomial::variable(const std::string& name) {
  Polynomial p;
  p.vars_ = {name};
  p.terms_.emplace(Exponents{1}, Rational(1));
  return p;
}

Polynomial Polynomial::from_terms(std::vector<std::string> variables, Terms terms) {
  Polynomial p;
  p.vars_ = std::move(variables);
  for (auto& [e, c] : terms)
    if (c != 0) p.terms_.emplace(e, c);
  p.trim();
  return p;
}

Rational Polynomial::constant_value() const {
  if (terms_.empty()) return Rational(0);
  auto it = terms_.find(Exponents(vars_.size(), 0));
  return it == terms_.end() ? Rational(0) : it->second;
}

unsigned Polynomial::total_degree() const { return terms_.empty() ? 0 : degree(terms_.begin()->first); }

unsigned Polynomial::degree_in(const std::string& name) const {
  auto it = std::lower_bound(vars_.begin(), vars_.end(), name);
  if (it == vars_.end() || *it != name) return 0;
  auto i = static_cast<std::size_t>(it - vars_.begin());
  unsigned best = 0;
  for (const auto& [e, c] : terms_) best = std::max(best, e[i]);
  return best;
}

Rational Polynomial::coefficient(const std::map<std::string, unsigned, std::less<>>& monomial) const {
  Exponents e(vars_.size(), 0);
  for (const auto& [name, power] : monomial) {
    if (power == 0) continue;
    auto it = std::lower_bound(vars_.begin(), vars_.end(), name);
    if (it == vars_.end() || *it != name) return Rational(0);
    e[static_cast<std::size_t>(it - vars_.begin())] = power;
  }
  auto found = terms_.find(e);
  return found == terms_.end() ? Rational(0) : found->second;
}

Rational Polynomial::evaluate(const Assignment& a) const {
  std::vector<Rational> values;
  values.reserve(vars_.size());
  for (const auto& v : vars_) {
    auto it = a.find(v);
    if (it == a.end()) throw EvaluationError("unbound variable: " + v);
    values.push_back(it->second);
  }
  Rational sum = 0;
  for (const auto& [e, c] : terms_) {
    Rational m = c;
    for (std::size_t i = 0; i < e.size(); ++i)
      for (unsigned k = 0; k < e[i]; ++k) m *= values[i];
    sum += m;
  }
  return sum;
}

Term Polynomial::to_term() const {
  if (terms_.empty()) return Term::constant(0);
  std::optional<Term> acc;
  for (const auto& [e, c] : terms_) {
    // Leading monomial carries its sign; later ones fold it into Add/Sub.
    bool subtract = acc.has_value() && c < 0;
    Rational coeff = subtract ? Rational(-c) : c;
    bool has_vars = std::any_of(e.begin(), e.end(), [](unsigned k) { return k > 0; });
    std::optional<Term> monomial;
    if (!has_vars || (coeff != 1 && coeff != -1)) monomial = Term::constant(coeff);
    for (std::size_t i = 0; i < e.size(); ++i)
      for (unsigned k = 0; k < e[i]; ++k) {
        Term v = Term::var(vars_[i]);
        if (!monomial) monomial = coeff == -1 ? Term::neg(v) : v;
        else monomial = Term::mul(*monomial, v);
      }
    if (!acc) acc = *monomial;
    else acc = subtract ? Term::sub(*acc, *monomial) : Term::add(*acc, *monomial);
  }
  return *acc;
}

Polynomial::Terms Polynomial::aligned_to(const std::vector<std::string>& target) const {
  if (target == vars_) return terms_;
  std::vector<std::size_t> index(vars_.size());
  for (std::size_t i = 0; i < vars_.size(); ++i)
    index[i] = static_cast<std::size_t>(std::lower_bound(target.begin(), target.end(), vars_[i]) - target.begin());
  Terms out;
  for (const auto& [e, c] : terms_) {
    Exponents mapped(target.size(), 0);
    for (std::size_t i = 0; i < e.size(); ++i) mapped[index[i]] = e[i];
    out.emplace(std::move(mapped), c);
  }
  return out;
}

void Polynomial::trim() {
  std::vector<bool> used(vars_.size(), false);
  for (const auto& [e, c] : terms_)
    for (std::size_t i = 0; i < e.size(); ++i)
      if (e[i] != 0) used[i] = true;
  if (std::all_of(used.begin(), used.end(), [](bool u) { return u; })) return;
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < vars_.size(); ++i)
    if (used[i]) kept.push_back(vars_[i]);
  Terms out;
  for (const auto& [e, c] : terms_) {
    Exponents reduced;
    reduced.reserve(kept.size());
    for (std::size_t i = 0; i < e.size(); ++i)
      if (used[i]) reduced.push_back(e[i]);
    out.emplace(std::move(reduced), c);
  }
  vars_ = std::move(kept);
  terms_ = std::move(out);
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  if (other.is_zero()) return *this;
  if (vars_ != other.vars_) {
    auto merged = merge_names(vars_, other.vars_);
    terms_ = aligned_to(merged);
    vars_ = std::move(merged);
  }
  Terms rhs = other.aligned_to(vars_);
  for (const auto& [e, c] : rhs) accumulate_into(terms_, e, c);
  trim();
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) { return *this += -other; }

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.is_zero() || b.is_zero()) return Polynomial();
  auto merged = merge_names(a.vars_, b.vars_);
  Polynomial::Terms lhs = a.aligned_to(merged);
  Polynomial::Terms rhs = b.aligned_to(merged);
  Polynomial::Terms out;
  Polynomial::Exponents e(merged.size());
  for (const auto& [ea, ca] : lhs)
    for (const auto& [eb, cb] : rhs) {
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
      accumulate_into(out, e, ca * cb);
    }
  Polynomial p;
  p.vars_ = std::move(merged);
  p.terms_ = std::move(out);
  p.trim();
  return p;
}

Polynomial& Polynomial::operator*=(const Polynomial& other) { return *this = *this * other; }

Polynomial& Polynomial::operator*=(const Rational& scalar) {
  if (scalar == 0) {
    vars_.clear();
    terms_.clear();
    return *this;
  }
  for (auto& [e, c] : terms_) c *= scalar;
  return *this;
}

Polynomial Polynomial::pow(unsigned exponent) const {
  Polynomial result(Rational(1));
  Polynomial base = *this;
  while (exponent > 0) {
    if (exponent & 1u) result *= base;
    exponent >>= 1u;
    if (exponent > 0) base *= base;
  }
  return result;
}

std::string to_string(const Polynomial& p) { return to_string(p.to_term()); }

// ---------------------------------------------------------------------------
// RationalFn

RationalFn::RationalFn(Polynomial num) : num_(std::move(num)), den_(Rational(1)) {}

RationalFn::RationalFn(Polynomial num, Polynomial den) : num_(std::move(num)), den_(std::move(den)) {
  if (den_.is_zero()) throw EvaluationError("division by zero polynomial");
  if (den_.is_constant()) {
    num_ *= Rational(1) / den_.constant_value();
    den_ = Polynomial(Rational(1));
  }
}

Rational RationalFn::evaluate(const Assignment& a) const {
  Rational d = den_.evaluate(a);
  if (d == 0) throw EvaluationError("division by zero");
  return num_.evaluate(a) / d;
}

Term RationalFn::to_term() const {
  if (den_.is_constant()) return num_.to_term();
  return Term::div(num_.to_term(), den_.to_term());
}

RationalFn operator+(const RationalFn& a, const RationalFn& b) {
  if (a.den_ == b.den_) return RationalFn(a.num_ + b.num_, a.den_);
  return RationalFn(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}

RationalFn operator-(const RationalFn& a) { return RationalFn(-a.num_, a.den_); }

RationalFn operator-(const RationalFn& a, const RationalFn& b) { return a + (-b); }

RationalFn operator*(const RationalFn& a, const RationalFn& b) {
  return RationalFn(a.num_ * b.num_, a.den_ * b.den_);
}

RationalFn operator/(const RationalFn& a, const RationalFn& b) {
  if (b.num_.is_zero()) throw EvaluationError("division by zero polynomial");
  return RationalFn(a.num_ * b.den_, a.den_ * b.num_);
}

RationalFn to_rational_fn(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::Const:
      return RationalFn(Polynomial(t.value()));
    case Term::Kind::Var:
      return RationalFn(Polynomial::variable(t.name()));
    case Term::Kind::Add:
      return to_rational_fn(t.lhs()) + to_rational_fn(t.rhs());
    case Term::Kind::Sub:
      return to_rational_fn(t.lhs()) - to_rational_fn(t.rhs());
    case Term::Kind::Mul:
      return to_rational_fn(t.lhs()) * to_rational_fn(t.rhs());
    case Term::Kind::Neg:
      return -to_rational_fn(t.lhs());
    case Term::Kind::Div:
      return to_rational_fn(t.lhs()) / to_rational_fn(t.rhs());
  }
  return RationalFn();
}

Term simplify(const Term& t) { return to_rational_fn(t).to_term(); }

}  // namespace cbn
