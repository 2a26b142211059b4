#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cbn/rational.hpp"
#include "cbn/term.hpp"

namespace cbn {

enum class SatStatus { Sat, Unsat, Unknown };

std::string to_string(SatStatus s);

/// Rationalized solver model plus the exact violation of the checked
/// assertions at that point.
struct Witness {
  Assignment values;
  Rational residual;
};

struct Verdict {
  SatStatus status = SatStatus::Unknown;
  std::optional<Witness> witness;  // present iff status == Sat
  std::string reason;              // diagnostic for Unknown
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Witnesses whose exact residual exceeds this are downgraded to Unknown.
inline const Rational kResidualTolerance{1, 10000000};

/// Satisfiability oracle for existentially closed conjunctions over the reals.
/// Not thread-safe; each analysis owns one instance.
class DecisionProcedure {
 public:
  virtual ~DecisionProcedure() = default;

  /// Decides ∃ variables: ⋀ assertions. Division is eliminated before the
  /// backend sees the formula; Sat witnesses are re-checked exactly.
  Verdict check(const std::vector<std::string>& variables, const std::vector<Constraint>& assertions);

  std::size_t checks() const { return checks_; }
  virtual std::string description() const = 0;

 protected:
  /// Backend hook; receives division-free core constraints.
  virtual Verdict run(const std::vector<std::string>& variables, const std::vector<Constraint>& assertions) = 0;

 private:
  std::size_t checks_ = 0;
};

struct SolverConfig {
  std::string command = "z3";
  std::vector<std::string> args = {"-in"};
  std::chrono::milliseconds timeout{60000};
  std::uint64_t seed = 0;
  int significant_digits = 12;
};

/// Solver command from an explicit flag, else $CBN_SOLVER, else "z3".
std::string resolve_solver_command(const std::optional<std::string>& flag);

/// Long-lived SMT-LIB 2 subprocess; each check runs inside push/pop.
class SmtLibSolver final : public DecisionProcedure {
 public:
  explicit SmtLibSolver(SolverConfig config = {});
  ~SmtLibSolver() override;
  SmtLibSolver(const SmtLibSolver&) = delete;
  SmtLibSolver& operator=(const SmtLibSolver&) = delete;

  std::string description() const override;
  const SolverConfig& config() const { return config_; }

 protected:
  Verdict run(const std::vector<std::string>& variables, const std::vector<Constraint>& assertions) override;

 private:
  class Process;
  void ensure_started();
  std::string command(const std::string& text);

  SolverConfig config_;
  std::unique_ptr<Process> process_;
  std::string version_;
};

/// Rewrites every atom containing Div into a division-free equivalent:
/// l op r with l - r = N/D becomes N op 0 for constant D, otherwise
/// (N*D op 0) & D != 0 (N = 0 & D != 0 for equalities).
Constraint eliminate_division(const Constraint& c);

std::string to_smtlib(const Term& t);
/// Emits the core form of a division-free constraint.
std::string to_smtlib(const Constraint& c);

/// Complete standalone script: logic, declarations, assertions, check-sat
/// and get-value.
std::string emit_script(const std::vector<std::string>& variables, const std::vector<Constraint>& assertions);

/// Parses a solver value: decimals (optionally '?'-suffixed), (- v), (/ a b).
Rational parse_smtlib_value(std::string_view text);

}  // namespace cbn
