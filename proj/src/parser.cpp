#include <cctype>
#include <sstream>

#include "cbn/term.hpp"

namespace cbn {

namespace {

enum class Tok {
  End, Number, Ident, Plus, Minus, Star, Slash, LParen, RParen,
  Lt, Leq, Eq, Neq, Geq, Gt, Not, And, Or, Colon, True, False, Exists
};

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto push = [&](Tok k, std::size_t start, std::size_t len) {
    out.push_back({k, std::string(src.substr(start, len)), start});
    i = start + len;
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i;
      while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '.')) ++j;
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
          j = k;
        }
      }
      push(Tok::Number, start, j - start);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      std::string_view word = src.substr(start, j - start);
      Tok k = Tok::Ident;
      if (word == "true") k = Tok::True;
      else if (word == "false") k = Tok::False;
      else if (word == "exists") k = Tok::Exists;
      push(k, start, j - start);
      continue;
    }
    auto two = src.substr(i, 2);
    if (two == "<=") { push(Tok::Leq, start, 2); continue; }
    if (two == ">=") { push(Tok::Geq, start, 2); continue; }
    if (two == "==") { push(Tok::Eq, start, 2); continue; }
    if (two == "!=") { push(Tok::Neq, start, 2); continue; }
    if (two == "&&") { push(Tok::And, start, 2); continue; }
    if (two == "||") { push(Tok::Or, start, 2); continue; }
    switch (c) {
      case '+': push(Tok::Plus, start, 1); continue;
      case '-': push(Tok::Minus, start, 1); continue;
      case '*': push(Tok::Star, start, 1); continue;
      case '/': push(Tok::Slash, start, 1); continue;
      case '(': push(Tok::LParen, start, 1); continue;
      case ')': push(Tok::RParen, start, 1); continue;
      case '<': push(Tok::Lt, start, 1); continue;
      case '>': push(Tok::Gt, start, 1); continue;
      case '=': push(Tok::Eq, start, 1); continue;
      case '!': push(Tok::Not, start, 1); continue;
      case '&': push(Tok::And, start, 1); continue;
      case '|': push(Tok::Or, start, 1); continue;
      case ':': push(Tok::Colon, start, 1); continue;
      default:
        throw ParseError(std::string("unknown operator '") + c + "'", start);
    }
  }
  out.push_back({Tok::End, "", src.size()});
  return out;
}

bool is_relop(Tok k) {
  return k == Tok::Lt || k == Tok::Leq || k == Tok::Eq || k == Tok::Neq || k == Tok::Geq || k == Tok::Gt;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : tokens_(tokenize(src)) {}

  Term term_only() {
    Term t = arith();
    expect_end();
    return t;
  }

  Query query_only() {
    Query q = query();
    expect_end();
    return q;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() { return tokens_[pos_++]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }
  void expect(Tok k, const char* what) {
    if (!accept(k)) throw ParseError(std::string("expected ") + what, peek().pos);
  }
  void expect_end() {
    if (peek().kind != Tok::End) throw ParseError("unexpected '" + peek().text + "'", peek().pos);
  }

  // -- arithmetic ----------------------------------------------------------

  Term arith() {
    Term t = product();
    for (;;) {
      if (accept(Tok::Plus)) t = Term::add(t, product());
      else if (accept(Tok::Minus)) t = Term::sub(t, product());
      else return t;
    }
  }

  Term product() {
    Term t = factor();
    for (;;) {
      if (accept(Tok::Star)) {
        t = Term::mul(t, factor());
      } else if (peek().kind == Tok::Slash) {
        std::size_t at = next().pos;
        Term d = factor();
        if (t.is_const() && d.is_const()) {
          if (d.value() == 0) throw ParseError("division by zero", at);
          t = Term::constant(t.value() / d.value());
        } else {
          t = Term::div(t, d);
        }
      } else {
        return t;
      }
    }
  }

  Term factor() {
    if (accept(Tok::Minus)) {
      Term inner = factor();
      if (inner.is_const()) return Term::constant(-inner.value());
      return Term::neg(inner);
    }
    return primary();
  }

  Term primary() {
    const Token& tok = peek();
    switch (tok.kind) {
      case Tok::Number: {
        ++pos_;
        try {
          return Term::constant(parse_decimal(tok.text));
        } catch (const std::invalid_argument&) {
          throw ParseError("malformed number '" + tok.text + "'", tok.pos);
        }
      }
      case Tok::Ident:
        ++pos_;
        return Term::var(tok.text);
      case Tok::LParen: {
        ++pos_;
        Term t = arith();
        expect(Tok::RParen, "')'");
        return t;
      }
      case Tok::End:
        throw ParseError("unexpected end of input", tok.pos);
      default:
        throw ParseError("unexpected '" + tok.text + "'", tok.pos);
    }
  }

  // -- logic ---------------------------------------------------------------

  static Query lift_or(Query a, Query b) {
    if (a.kind() == Query::Kind::Base && b.kind() == Query::Kind::Base)
      return Query::base(Constraint::disj(a.constraint(), b.constraint()));
    return Query::negate(Query::conj(Query::negate(std::move(a)), Query::negate(std::move(b))));
  }

  static Query lift_and(Query a, Query b) {
    if (a.kind() == Query::Kind::Base && b.kind() == Query::Kind::Base)
      return Query::base(Constraint::conj(a.constraint(), b.constraint()));
    return Query::conj(std::move(a), std::move(b));
  }

  static Query lift_not(Query a) {
    if (a.kind() == Query::Kind::Base) return Query::base(Constraint::negate(a.constraint()));
    return Query::negate(std::move(a));
  }

  Query query() {
    if (accept(Tok::Exists)) {
      const Token& name = peek();
      expect(Tok::Ident, "variable name after 'exists'");
      if (!accept(Tok::Colon)) expect(Tok::Colon, "':'");
      return Query::exists(VarRef{name.text, VarKind::Prob}, query());
    }
    Query q = conjunction();
    while (accept(Tok::Or)) q = lift_or(q, conjunction());
    return q;
  }

  Query conjunction() {
    Query q = negation();
    while (accept(Tok::And)) q = lift_and(q, negation());
    return q;
  }

  Query negation() {
    if (accept(Tok::Not)) return lift_not(negation());
    if (peek().kind == Tok::Exists) return query();
    return atom();
  }

  Query atom() {
    if (accept(Tok::True)) return Query::base(Constraint::truth());
    if (accept(Tok::False)) return Query::base(Constraint::falsity());
    if (peek().kind == Tok::LParen) {
      // Either a parenthesized formula or the start of an arithmetic term.
      std::size_t saved = pos_;
      try {
        ++pos_;
        Query inner = query();
        if (accept(Tok::RParen) && !is_relop(peek().kind) && !is_arith_continuation(peek().kind)) return inner;
      } catch (const ParseError&) {
      }
      pos_ = saved;
    }
    return comparison();
  }

  static bool is_arith_continuation(Tok k) {
    return k == Tok::Plus || k == Tok::Minus || k == Tok::Star || k == Tok::Slash;
  }

  Query comparison() {
    Term lhs = arith();
    if (!is_relop(peek().kind)) throw ParseError("expected comparison operator", peek().pos);
    std::vector<Constraint> parts;
    while (is_relop(peek().kind)) {
      Tok op = next().kind;
      Term rhs = arith();
      switch (op) {
        case Tok::Lt: parts.push_back(Constraint::lt(lhs, rhs)); break;
        case Tok::Leq: parts.push_back(Constraint::leq(lhs, rhs)); break;
        case Tok::Eq: parts.push_back(Constraint::eq(lhs, rhs)); break;
        case Tok::Neq: parts.push_back(Constraint::negate(Constraint::eq(lhs, rhs))); break;
        case Tok::Geq: parts.push_back(Constraint::geq(lhs, rhs)); break;
        case Tok::Gt: parts.push_back(Constraint::gt(lhs, rhs)); break;
        default: break;
      }
      lhs = rhs;
    }
    return Query::base(Constraint::conj(parts));
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

// -- printing ---------------------------------------------------------------

int term_precedence(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::Add:
    case Term::Kind::Sub:
      return 1;
    case Term::Kind::Mul:
    case Term::Kind::Div:
      return 2;
    case Term::Kind::Neg:
      return 3;
    case Term::Kind::Const:
      // Non-decimal rationals print as a parenthesized quotient.
      return 4;
    case Term::Kind::Var:
      return 4;
  }
  return 4;
}

void print_term(std::ostream& os, const Term& t, int min_prec) {
  bool parens = term_precedence(t) < min_prec;
  if (parens) os << '(';
  switch (t.kind()) {
    case Term::Kind::Const:
      if (is_finite_decimal(t.value())) os << to_string(t.value());
      else os << '(' << t.value().get_str() << ')';
      break;
    case Term::Kind::Var:
      os << t.name();
      break;
    case Term::Kind::Add:
      print_term(os, t.lhs(), 1);
      os << " + ";
      print_term(os, t.rhs(), 2);
      break;
    case Term::Kind::Sub:
      print_term(os, t.lhs(), 1);
      os << " - ";
      print_term(os, t.rhs(), 2);
      break;
    case Term::Kind::Mul:
      print_term(os, t.lhs(), 2);
      os << '*';
      print_term(os, t.rhs(), 3);
      break;
    case Term::Kind::Div:
      print_term(os, t.lhs(), 2);
      os << '/';
      print_term(os, t.rhs(), 3);
      break;
    case Term::Kind::Neg:
      os << '-';
      // A constant operand would be folded by the parser.
      if (t.lhs().is_const()) {
        os << '(';
        print_term(os, t.lhs(), 0);
        os << ')';
      } else {
        print_term(os, t.lhs(), 3);
      }
      break;
  }
  if (parens) os << ')';
}

int constraint_precedence(const Constraint& c) {
  switch (c.kind()) {
    case Constraint::Kind::Or:
      return 1;
    case Constraint::Kind::And:
      return 2;
    case Constraint::Kind::Not:
      return 3;
    default:
      return 4;
  }
}

void print_constraint(std::ostream& os, const Constraint& c, int min_prec) {
  bool parens = constraint_precedence(c) < min_prec;
  if (parens) os << '(';
  auto atom = [&](const char* op) {
    print_term(os, c.left(), 0);
    os << ' ' << op << ' ';
    print_term(os, c.right(), 0);
  };
  switch (c.kind()) {
    case Constraint::Kind::True: os << "true"; break;
    case Constraint::Kind::Leq: atom("<="); break;
    case Constraint::Kind::Lt: atom("<"); break;
    case Constraint::Kind::Eq: atom("="); break;
    case Constraint::Kind::Geq: atom(">="); break;
    case Constraint::Kind::Gt: atom(">"); break;
    case Constraint::Kind::Not:
      os << '!';
      // Atoms need parentheses: "!x < 1" would not parse.
      if (c.first().kind() == Constraint::Kind::True) {
        os << "true";
      } else {
        os << '(';
        print_constraint(os, c.first(), 0);
        os << ')';
      }
      break;
    case Constraint::Kind::And:
      print_constraint(os, c.first(), 2);
      os << " & ";
      print_constraint(os, c.second(), 3);
      break;
    case Constraint::Kind::Or:
      print_constraint(os, c.first(), 1);
      os << " | ";
      print_constraint(os, c.second(), 2);
      break;
  }
  if (parens) os << ')';
}

void print_query(std::ostream& os, const Query& q, int min_prec) {
  switch (q.kind()) {
    case Query::Kind::Base:
      print_constraint(os, q.constraint(), min_prec);
      return;
    case Query::Kind::Exists:
      if (min_prec > 0) os << '(';
      os << "exists " << q.bound().name << ": ";
      print_query(os, q.body(), 0);
      if (min_prec > 0) os << ')';
      return;
    case Query::Kind::Not:
      os << "!(";
      print_query(os, q.body(), 0);
      os << ')';
      return;
    case Query::Kind::And:
      if (min_prec > 2) os << '(';
      print_query(os, q.first(), 2);
      os << " & ";
      print_query(os, q.second(), 3);
      if (min_prec > 2) os << ')';
      return;
  }
}

}  // namespace

Term parse_term(std::string_view source) { return Parser(source).term_only(); }

Constraint parse_constraint(std::string_view source) {
  Query q = Parser(source).query_only();
  if (q.kind() != Query::Kind::Base) throw ParseError("quantifiers are not allowed in constraints", 0);
  return q.constraint();
}

Query parse_query(std::string_view source) { return Parser(source).query_only(); }

std::string to_string(const Term& t) {
  std::ostringstream os;
  print_term(os, t, 0);
  return os.str();
}

std::string to_string(const Constraint& c) {
  std::ostringstream os;
  print_constraint(os, c, 0);
  return os.str();
}

std::string to_string(const Query& q) {
  std::ostringstream os;
  print_query(os, q, 0);
  return os.str();
}

}  // namespace cbn
