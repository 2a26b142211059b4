#include "cbn/solver.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <sstream>

#include "cbn/polynomial.hpp"

namespace cbn {

std::string to_string(SatStatus s) {
  switch (s) {
    case SatStatus::Sat: return "sat";
    case SatStatus::Unsat: return "unsat";
    case SatStatus::Unknown: return "unknown";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Formula preparation

namespace {

Constraint not_zero(const Term& d) { return Constraint::negate(Constraint::eq(d, Term::constant(0))); }

Constraint eliminate_atom(const Constraint& c) {
  if (!c.left().has_div() && !c.right().has_div()) return c;
  RationalFn diff = to_rational_fn(Term::sub(c.left(), c.right()));
  Term zero = Term::constant(0);
  auto rebuild = [&](const Term& lhs) {
    switch (c.kind()) {
      case Constraint::Kind::Leq: return Constraint::leq(lhs, zero);
      case Constraint::Kind::Lt: return Constraint::lt(lhs, zero);
      case Constraint::Kind::Eq: return Constraint::eq(lhs, zero);
      case Constraint::Kind::Geq: return Constraint::geq(lhs, zero);
      default: return Constraint::gt(lhs, zero);
    }
  };
  if (diff.is_polynomial()) return rebuild(diff.num().to_term());
  Term den = diff.den().to_term();
  // Multiplying by D preserves the sign of N/D only up to sign(D), so use
  // N*D; for equalities N = 0 suffices.
  Term lhs = c.kind() == Constraint::Kind::Eq ? diff.num().to_term() : (diff.num() * diff.den()).to_term();
  return Constraint::conj(rebuild(lhs), not_zero(den));
}

void collect_and(const Constraint& c, std::vector<const Constraint*>& out) {
  if (c.kind() == Constraint::Kind::And) {
    collect_and(c.first(), out);
    collect_and(c.second(), out);
  } else {
    out.push_back(&c);
  }
}

void emit_literal(std::ostream& os, const Rational& value) {
  Rational magnitude = abs(value);
  bool negative = value < 0;
  if (negative) os << "(- ";
  if (magnitude.get_den() == 1) os << magnitude.get_num().get_str() << ".0";
  else os << "(/ " << magnitude.get_num().get_str() << ".0 " << magnitude.get_den().get_str() << ".0)";
  if (negative) os << ')';
}

void emit_term(std::ostream& os, const Term& t) {
  switch (t.kind()) {
    case Term::Kind::Const: emit_literal(os, t.value()); return;
    case Term::Kind::Var: os << '|' << t.name() << '|'; return;
    case Term::Kind::Neg:
      os << "(- ";
      emit_term(os, t.lhs());
      os << ')';
      return;
    default: break;
  }
  const char* op = "+";
  switch (t.kind()) {
    case Term::Kind::Sub: op = "-"; break;
    case Term::Kind::Mul: op = "*"; break;
    case Term::Kind::Div: op = "/"; break;
    default: break;
  }
  os << '(' << op << ' ';
  emit_term(os, t.lhs());
  os << ' ';
  emit_term(os, t.rhs());
  os << ')';
}

void emit_core(std::ostream& os, const Constraint& c) {
  switch (c.kind()) {
    case Constraint::Kind::True: os << "true"; return;
    case Constraint::Kind::Leq:
    case Constraint::Kind::Lt:
      os << (c.kind() == Constraint::Kind::Leq ? "(<= " : "(< ");
      emit_term(os, c.left());
      os << ' ';
      emit_term(os, c.right());
      os << ')';
      return;
    case Constraint::Kind::Not:
      os << "(not ";
      emit_core(os, c.first());
      os << ')';
      return;
    case Constraint::Kind::And: {
      std::vector<const Constraint*> parts;
      collect_and(c, parts);
      os << "(and";
      for (const auto* p : parts) {
        os << ' ';
        emit_core(os, *p);
      }
      os << ')';
      return;
    }
    default:
      throw std::logic_error("derived operator reached emission");
  }
}

// Minimal s-expression reader for solver responses.
struct SExpr {
  std::string atom;
  std::vector<SExpr> items;
  bool is_list = false;
};

SExpr read_sexpr(std::string_view text, std::size_t& pos) {
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  if (pos >= text.size()) throw SolverError("truncated solver response");
  SExpr out;
  if (text[pos] == '(') {
    out.is_list = true;
    ++pos;
    for (;;) {
      while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
      if (pos >= text.size()) throw SolverError("unbalanced solver response");
      if (text[pos] == ')') {
        ++pos;
        return out;
      }
      out.items.push_back(read_sexpr(text, pos));
    }
  }
  if (text[pos] == '|') {
    std::size_t end = text.find('|', pos + 1);
    if (end == std::string_view::npos) throw SolverError("unterminated symbol in solver response");
    out.atom = std::string(text.substr(pos + 1, end - pos - 1));
    pos = end + 1;
    return out;
  }
  if (text[pos] == '"') {
    std::size_t end = pos + 1;
    while (end < text.size() && !(text[end] == '"' && (end + 1 >= text.size() || text[end + 1] != '"')))
      end += text[end] == '"' ? 2 : 1;
    out.atom = std::string(text.substr(pos + 1, end - pos - 1));
    pos = end + 1;
    return out;
  }
  std::size_t start = pos;
  while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) && text[pos] != '(' && text[pos] != ')')
    ++pos;
  out.atom = std::string(text.substr(start, pos - start));
  return out;
}

Rational value_of(const SExpr& e) {
  if (!e.is_list) return parse_decimal(e.atom);
  if (e.items.size() == 2 && !e.items[0].is_list && e.items[0].atom == "-") return -value_of(e.items[1]);
  if (e.items.size() == 3 && !e.items[0].is_list && e.items[0].atom == "/") {
    Rational d = value_of(e.items[2]);
    if (d == 0) throw SolverError("zero denominator in solver value");
    return value_of(e.items[1]) / d;
  }
  throw SolverError("unsupported value form in solver response");
}

}  // namespace

Constraint eliminate_division(const Constraint& c) {
  switch (c.kind()) {
    case Constraint::Kind::True: return c;
    case Constraint::Kind::Not: return Constraint::negate(eliminate_division(c.first()));
    case Constraint::Kind::And: return Constraint::conj(eliminate_division(c.first()), eliminate_division(c.second()));
    case Constraint::Kind::Or: return Constraint::disj(eliminate_division(c.first()), eliminate_division(c.second()));
    default: return eliminate_atom(c);
  }
}

std::string to_smtlib(const Term& t) {
  std::ostringstream os;
  emit_term(os, t);
  return os.str();
}

std::string to_smtlib(const Constraint& c) {
  std::ostringstream os;
  emit_core(os, c.to_core());
  return os.str();
}

std::string emit_script(const std::vector<std::string>& variables, const std::vector<Constraint>& assertions) {
  std::ostringstream os;
  os << "(set-logic QF_NRA)\n(set-option :produce-models true)\n";
  for (const auto& v : variables) os << "(declare-const |" << v << "| Real)\n";
  for (const auto& a : assertions) os << "(assert " << to_smtlib(eliminate_division(a)) << ")\n";
  if (assertions.empty()) os << "(assert true)\n";
  os << "(check-sat)\n";
  if (!variables.empty()) {
    os << "(get-value (";
    for (std::size_t i = 0; i < variables.size(); ++i) os << (i ? " " : "") << '|' << variables[i] << '|';
    os << "))\n";
  }
  os << "(exit)\n";
  return os.str();
}

Rational parse_smtlib_value(std::string_view text) {
  std::size_t pos = 0;
  return value_of(read_sexpr(text, pos));
}

// ---------------------------------------------------------------------------
// DecisionProcedure

Verdict DecisionProcedure::check(const std::vector<std::string>& variables, const std::vector<Constraint>& assertions) {
  ++checks_;
  std::vector<Constraint> prepared;
  prepared.reserve(assertions.size());
  for (const auto& a : assertions) prepared.push_back(eliminate_division(a).to_core());
  Verdict v = run(variables, prepared);
  if (v.status != SatStatus::Sat) {
    v.witness.reset();
    return v;
  }
  if (!v.witness) return Verdict{SatStatus::Unknown, std::nullopt, "solver reported sat without a model"};

  Rational residual = 0;
  for (const auto& a : assertions) {
    std::optional<Rational> r;
    try {
      r = violation(a, v.witness->values);
    } catch (const EvaluationError& e) {
      return Verdict{SatStatus::Unknown, std::nullopt, std::string("witness not evaluable: ") + e.what()};
    }
    if (!r) return Verdict{SatStatus::Unknown, std::nullopt, "witness hits an undefined term"};
    if (*r > residual) residual = *r;
  }
  v.witness->residual = residual;
  if (residual > kResidualTolerance)
    return Verdict{SatStatus::Unknown, std::nullopt, "witness residual " + to_decimal(residual, 6) + " exceeds 1e-7"};
  return v;
}

std::string resolve_solver_command(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv("CBN_SOLVER"); env != nullptr && *env != '\0') return env;
  return "z3";
}

// ---------------------------------------------------------------------------
// SmtLibSolver

class SmtLibSolver::Process {
 public:
  Process(const std::string& command, const std::vector<std::string>& args) {
    static const bool ignore_sigpipe = [] {
      ::signal(SIGPIPE, SIG_IGN);
      return true;
    }();
    (void)ignore_sigpipe;

    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0) throw SolverError(std::string("pipe: ") + std::strerror(errno));
    if (::pipe(from_child) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      throw SolverError(std::string("pipe: ") + std::strerror(errno));
    }
    std::vector<std::string> argv_storage{command};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_storage) argv.push_back(a.data());
    argv.push_back(nullptr);

    pid_ = ::fork();
    if (pid_ < 0) throw SolverError(std::string("fork: ") + std::strerror(errno));
    if (pid_ == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      ::execvp(argv[0], argv.data());
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    in_ = to_child[1];
    out_ = from_child[0];
  }

  ~Process() {
    if (in_ >= 0) {
      static const char kExit[] = "(exit)\n";
      [[maybe_unused]] auto n = ::write(in_, kExit, sizeof(kExit) - 1);
      ::close(in_);
    }
    if (out_ >= 0) ::close(out_);
    if (pid_ > 0) {
      for (int i = 0; i < 50; ++i) {
        if (::waitpid(pid_, nullptr, WNOHANG) == pid_) return;
        ::usleep(2000);
      }
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, nullptr, 0);
    }
  }

  Process(const Process&) = delete;
  Process& operator=(const Process&) = delete;

  void send(const std::string& text) {
    std::size_t done = 0;
    while (done < text.size()) {
      ssize_t n = ::write(in_, text.data() + done, text.size() - done);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw SolverError("solver process is not accepting input");
      }
      done += static_cast<std::size_t>(n);
    }
  }

  /// Next complete response: a balanced s-expression or a bare line.
  std::string receive(std::chrono::steady_clock::time_point deadline) {
    for (;;) {
      if (auto r = extract(); r) return *r;
      auto now = std::chrono::steady_clock::now();
      if (now >= deadline) throw SolverError("solver timed out");
      auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
      pollfd pfd{out_, POLLIN, 0};
      int ready = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(remaining, 1000)));
      if (ready < 0 && errno != EINTR) throw SolverError("poll failed");
      if (ready <= 0) continue;
      char chunk[4096];
      ssize_t n = ::read(out_, chunk, sizeof chunk);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw SolverError("solver process exited");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  std::optional<std::string> extract() {
    std::size_t i = 0;
    while (i < buffer_.size() && std::isspace(static_cast<unsigned char>(buffer_[i]))) ++i;
    if (i == buffer_.size()) return std::nullopt;
    std::size_t end = std::string::npos;
    if (buffer_[i] == '(') {
      int depth = 0;
      bool in_string = false, in_symbol = false;
      for (std::size_t j = i; j < buffer_.size(); ++j) {
        char c = buffer_[j];
        if (in_string) {
          if (c == '"') in_string = false;
        } else if (in_symbol) {
          if (c == '|') in_symbol = false;
        } else if (c == '"') {
          in_string = true;
        } else if (c == '|') {
          in_symbol = true;
        } else if (c == '(') {
          ++depth;
        } else if (c == ')' && --depth == 0) {
          end = j + 1;
          break;
        }
      }
    } else {
      std::size_t nl = buffer_.find('\n', i);
      if (nl != std::string::npos) end = nl;
    }
    if (end == std::string::npos) return std::nullopt;
    std::string response = buffer_.substr(i, end - i);
    buffer_.erase(0, end);
    return response;
  }

  pid_t pid_ = -1;
  int in_ = -1;
  int out_ = -1;
  std::string buffer_;
};

SmtLibSolver::SmtLibSolver(SolverConfig config) : config_(std::move(config)) {}

SmtLibSolver::~SmtLibSolver() = default;

std::string SmtLibSolver::command(const std::string& text) {
  process_->send(text + "\n");
  auto deadline = std::chrono::steady_clock::now() + config_.timeout + std::chrono::seconds(10);
  std::string response = process_->receive(deadline);
  if (response.rfind("(error", 0) == 0) throw SolverError("solver error: " + response);
  return response;
}

void SmtLibSolver::ensure_started() {
  if (process_) return;
  process_ = std::make_unique<Process>(config_.command, config_.args);
  try {
    command("(set-option :print-success true)");
    command("(set-option :produce-models true)");
    command("(set-option :pp.decimal true)");
    command("(set-option :pp.decimal_precision " + std::to_string(config_.significant_digits + 8) + ")");
    command("(set-option :timeout " + std::to_string(config_.timeout.count()) + ")");
    command("(set-option :random-seed " + std::to_string(config_.seed) + ")");
    command("(set-logic QF_NRA)");
    if (version_.empty()) {
      SExpr info;
      std::size_t pos = 0;
      std::string response = command("(get-info :version)");
      info = read_sexpr(response, pos);
      version_ = info.is_list && info.items.size() == 2 ? info.items[1].atom : response;
    }
  } catch (...) {
    process_.reset();
    throw;
  }
}

std::string SmtLibSolver::description() const {
  return config_.command + (version_.empty() ? "" : " " + version_);
}

Verdict SmtLibSolver::run(const std::vector<std::string>& variables, const std::vector<Constraint>& assertions) {
  try {
    ensure_started();
    command("(push 1)");
    for (const auto& v : variables) command("(declare-const |" + v + "| Real)");
    for (const auto& a : assertions) command("(assert " + to_smtlib(a) + ")");
    std::string status = command("(check-sat)");

    Verdict verdict;
    if (status == "sat") {
      verdict.status = SatStatus::Sat;
      Witness w;
      if (!variables.empty()) {
        std::string request = "(get-value (";
        for (std::size_t i = 0; i < variables.size(); ++i) request += (i ? " |" : "|") + variables[i] + "|";
        request += "))";
        std::string response = command(request);
        std::size_t pos = 0;
        SExpr pairs = read_sexpr(response, pos);
        for (const auto& pair : pairs.items) {
          if (!pair.is_list || pair.items.size() != 2) throw SolverError("malformed get-value response");
          w.values[pair.items[0].atom] = round_significant(value_of(pair.items[1]), config_.significant_digits);
        }
      }
      verdict.witness = std::move(w);
    } else if (status == "unsat") {
      verdict.status = SatStatus::Unsat;
    } else {
      verdict.status = SatStatus::Unknown;
      std::string reason = command("(get-info :reason-unknown)");
      verdict.reason = "solver returned " + status + ": " + reason;
    }
    command("(pop 1)");
    return verdict;
  } catch (const SolverError& e) {
    process_.reset();
    return Verdict{SatStatus::Unknown, std::nullopt, e.what()};
  }
}

}  // namespace cbn
