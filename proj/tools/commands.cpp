#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "cbn/compose.hpp"
#include "cbn/generate.hpp"
#include "cbn/inference.hpp"
#include "cbn/logic.hpp"
#include "cbn/model.hpp"
#include "cbn/optimize.hpp"
#include "cbn/sensitivity.hpp"
#include "report.hpp"

namespace cbn::cli {
namespace {

struct Globals {
  std::optional<std::string> solver;
  double timeout = 60;
  std::uint64_t seed = 0;
  std::string report_path;
  bool no_denominator_guard = false;
  bool deterministic = false;
};

/// Raised for bad flag values and unreadable inputs; maps to kUsage.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

InferenceOptions inference_options(const Globals& g) {
  InferenceOptions o;
  o.denominator_guard = !g.no_denominator_guard;
  return o;
}

std::unique_ptr<SmtLibSolver> make_solver(const Globals& g) {
  if (g.timeout <= 0) throw UsageError("--timeout must be positive");
  SolverConfig config;
  config.command = resolve_solver_command(g.solver);
  config.timeout = std::chrono::milliseconds(static_cast<long long>(g.timeout * 1000));
  config.seed = g.seed;
  return std::make_unique<SmtLibSolver>(config);
}

ConstrainedBN load(const std::string& path, const Globals& g, std::vector<std::string>* generated = nullptr) {
  ConstrainedBN b = load_model_file(path);
  auto names = ensure_marginal_definitions(b, inference_options(g));
  if (generated) *generated = names;
  return b;
}

Rational parse_rational(const std::string& text) {
  try {
    if (text.find('/') != std::string::npos) {
      Rational r(text);
      r.canonicalize();
      return r;
    }
    return parse_decimal(text);
  } catch (const std::exception&) {
    throw UsageError("not a rational number: " + text);
  }
}

std::pair<std::string, std::string> parse_event(const std::string& text) {
  auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size())
    throw UsageError("expected node=state, got: " + text);
  return {text.substr(0, eq), text.substr(eq + 1)};
}

Json constraints_json(const std::vector<Constraint>& cs) {
  Json j = Json::array();
  for (const auto& c : cs) j.push_back(to_string(c));
  return j;
}

Json solver_json(const DecisionProcedure& oracle) {
  return Json{{"solver", oracle.description()}, {"solver_checks", oracle.checks()}};
}

void emit(const Report& r, const Globals& g, std::ostream& out) {
  auto text = render(r);
  out << text;
  if (!g.report_path.empty()) {
    std::ofstream f(g.report_path, std::ios::binary);
    if (!f) throw UsageError("cannot write report: " + g.report_path);
    f << text;
  }
}

int truth_exit(Truth t) {
  switch (t) {
    case Truth::Holds: return kSuccess;
    case Truth::Fails: return kFails;
    case Truth::Unknown: return kUnknown;
  }
  return kUnknown;
}

int outcome_exit(Outcome o) {
  switch (o) {
    case Outcome::Interval:
    case Outcome::ZeroExtremum: return kSuccess;
    case Outcome::Inconsistent: return kFails;
    case Outcome::Aborted: return kUnknown;
  }
  return kUnknown;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// validate

int cmd_validate(const std::string& path, const Globals& g, std::ostream& out) {
  Report r;
  r.command = "validate";
  r.inputs = {{"model", path}};
  ConstrainedBN b;
  std::vector<std::string> generated;
  try {
    b = load(path, g, &generated);
  } catch (const ModelError& e) {
    r.outcome = "violations";
    r.result = {{"load", e.what()}};
    r.warnings.push_back(e.what());
    emit(r, g, out);
    return kFails;
  }
  r.model_hash = model_hash(b);
  auto oracle = make_solver(g);

  bool failed = false;
  bool unknown = false;
  Json wf = Json::array();
  for (const auto& v : validate_well_formed(b)) wf.push_back({{"variable", v.variable}, {"rule", v.rule}});
  failed = failed || !wf.empty();

  auto sound = check_sound(b, *oracle);
  std::string sound_text = sound.status == Soundness::Sound     ? "sound"
                           : sound.status == Soundness::Unsound ? "unsound"
                                                                 : "unknown";
  failed = failed || sound.status == Soundness::Unsound;
  unknown = unknown || sound.status == Soundness::Unknown;
  if (sound.witness) r.witness = sound.witness;

  auto consistent = check_consistent(b, *oracle);
  std::string consistent_text = consistent.status == SatStatus::Sat     ? "consistent"
                                : consistent.status == SatStatus::Unsat ? "inconsistent"
                                                                        : "unknown";
  failed = failed || consistent.status == SatStatus::Unsat;
  unknown = unknown || consistent.status == SatStatus::Unknown;

  r.result["generated_definitions"] = generated;
  r.result["well_formed"] = {{"ok", wf.empty()}, {"violations", wf}};
  r.result["soundness"] = {{"status", sound_text}, {"rows_discharged", sound.rows_discharged}};
  if (!sound.reason.empty()) r.result["soundness"]["reason"] = sound.reason;
  r.result["consistency"] = {{"status", consistent_text}};
  if (!consistent.reason.empty()) r.result["consistency"]["reason"] = consistent.reason;
  r.stats = solver_json(*oracle);
  if (!g.no_denominator_guard) r.warnings.push_back("deviation: denominator guard D > 0 added for conditional marginals");
  r.outcome = failed ? "violations" : unknown ? "unknown" : "ok";
  emit(r, g, out);
  return failed ? kFails : unknown ? kUnknown : kSuccess;
}

// ---------------------------------------------------------------------------
// judge

int cmd_judge(const std::string& path, const std::string& mode, const std::string& phi, const Globals& g,
              std::ostream& out) {
  auto b = load(path, g);
  auto oracle = make_solver(g);
  Report r;
  r.command = "judge";
  r.model_hash = model_hash(b);
  r.inputs = {{"model", path}, {"mode", mode}, {"phi", phi}};
  auto start = std::chrono::steady_clock::now();
  Judgment j;
  if (mode == "may") {
    j = judge_may(b, parse_query(phi), *oracle);
  } else if (mode == "must") {
    j = judge_must(b, parse_query(phi), *oracle);
  } else {
    throw UsageError("mode must be may or must");
  }
  r.outcome = to_string(j.truth);
  r.witness = j.witness;
  if (j.witness) r.result["witness_role"] = mode == "may" ? "satisfies phi" : "counterexample";
  if (!j.reason.empty()) r.result["reason"] = j.reason;
  r.warnings = j.warnings;
  r.stats = solver_json(*oracle);
  if (!g.deterministic) r.stats["wall_time_ms"] = elapsed_ms(start);
  emit(r, g, out);
  return truth_exit(j.truth);
}

// ---------------------------------------------------------------------------
// sup / inf

struct BoundArgs {
  std::string term;
  std::string delta = "1e-9";
  bool plain = false;
  bool check_invariants = false;
};

int cmd_bound(const std::string& command, const std::string& path, const BoundArgs& a, const Globals& g,
              std::ostream& out) {
  auto b = load(path, g);
  auto delta = parse_rational(a.delta);
  if (delta <= 0) throw UsageError("--delta must be positive");
  auto t = parse_term(a.term);
  auto oracle = make_solver(g);
  OptimizeOptions options;
  options.check_invariants = a.check_invariants;
  IntervalResult res;
  if (command == "sup")
    res = a.plain ? sup(t, delta, b, *oracle, options) : sup_star(t, delta, b, *oracle, options);
  else
    res = a.plain ? inf(t, delta, b, *oracle, options) : inf_star(t, delta, b, *oracle, options);

  Report r;
  r.command = command;
  r.model_hash = model_hash(b);
  r.inputs = {{"model", path}, {"term", a.term}, {"delta", to_string(delta)},
              {"variant", a.plain ? "plain" : "starred"}};
  auto payload = interval_json(res, g.deterministic);
  r.outcome = payload["outcome"];
  r.stats = payload["stats"];
  r.stats.update(solver_json(*oracle));
  payload.erase("outcome");
  payload.erase("stats");
  r.result = payload;
  r.witness = res.witness;
  r.warnings = res.warnings;
  emit(r, g, out);
  return outcome_exit(res.outcome);
}

// ---------------------------------------------------------------------------
// marginal

struct MarginalArgs {
  std::string name;
  std::string node;
  std::string state;
  std::vector<std::string> evidence;
  std::string output;
};

int cmd_marginal(const std::string& path, const MarginalArgs& a, const Globals& g, std::ostream& out) {
  auto b = load(path, g);
  MarginalSpec spec;
  std::string name = a.name;
  bool recorded = false;
  if (a.node.empty()) {
    if (name.empty()) throw UsageError("give --name of a recorded marginal or --node and --state");
    auto it = b.marginal_defs.find(name);
    if (it == b.marginal_defs.end()) throw UsageError("no recorded marginal named " + name);
    spec = it->second;
    recorded = true;
  } else {
    if (a.state.empty()) throw UsageError("--node requires --state");
    spec.target_node = a.node;
    spec.target_state = a.state;
    for (const auto& e : a.evidence) spec.evidence.insert(parse_event(e));
    if (name.empty()) name = "mp";
  }
  check_marginal_spec(b, spec);
  auto start = std::chrono::steady_clock::now();
  auto def = symbolic_marginal(b, spec, name, inference_options(g));
  double ms = elapsed_ms(start);

  for (const auto& c : def.constraints) out << to_string(c) << "\n";

  Report r;
  r.command = "marginal";
  r.model_hash = model_hash(b);
  Json ev = Json::object();
  for (const auto& [n, s] : spec.evidence) ev[n] = s;
  r.inputs = {{"model", path}, {"mp", name}, {"node", spec.target_node}, {"state", spec.target_state},
              {"evidence", ev}};
  r.outcome = "ok";
  r.result = {{"mp", name},
              {"numerator", to_string(def.numerator)},
              {"denominator", to_string(def.denominator)},
              {"constraints", constraints_json(def.constraints)}};
  r.stats = {{"largest_clique", def.largest_clique}, {"numerator_terms", def.numerator.size()},
             {"denominator_terms", def.denominator.size()}};
  if (!g.deterministic) r.stats["wall_time_ms"] = ms;
  if (!def.denominator.is_constant() && !g.no_denominator_guard)
    r.warnings.push_back("deviation: denominator guard D > 0 added");
  if (!a.output.empty()) {
    if (recorded) throw UsageError("-o installs a new marginal; give --node/--state with a fresh --name");
    save_model_file(install_marginal(b, spec, name, inference_options(g)), a.output);
    r.result["output"] = a.output;
  }
  emit(r, g, out);
  return kSuccess;
}

// ---------------------------------------------------------------------------
// compose

struct ComposeArgs {
  std::string left;
  std::string right;
  std::vector<std::string> links;
  std::string policy = "reject";
  std::string left_tag = "L";
  std::string right_tag = "R";
  std::string output;
};

int cmd_compose(const ComposeArgs& a, const Globals& g, std::ostream& out) {
  UnionRecipe recipe;
  recipe.left = load(a.left, g);
  recipe.right = load(a.right, g);
  for (const auto& l : a.links) recipe.links.push_back(parse_constraint(l));
  if (a.policy == "reject")
    recipe.policy = RenamePolicy::RejectCollisions;
  else if (a.policy == "suffix")
    recipe.policy = RenamePolicy::AutoSuffix;
  else
    throw UsageError("--policy must be reject or suffix");
  recipe.left_tag = a.left_tag;
  recipe.right_tag = a.right_tag;

  Report r;
  r.command = "compose";
  r.inputs = {{"left", a.left},         {"right", a.right},
              {"left_hash", model_hash(recipe.left)}, {"right_hash", model_hash(recipe.right)},
              {"links", a.links},       {"policy", a.policy}};
  auto oracle = make_solver(g);
  UnionResult u;
  try {
    u = constrained_union(recipe, oracle.get());
  } catch (const ModelError& e) {
    r.outcome = "rejected";
    r.result = {{"reason", e.what()}};
    r.stats = solver_json(*oracle);
    emit(r, g, out);
    return kFails;
  }
  r.model_hash = model_hash(u.model);
  r.outcome = "ok";
  auto map_json = [](const std::map<std::string, std::string>& m) {
    Json j = Json::object();
    for (const auto& [k, v] : m) j[k] = v;
    return j;
  };
  r.result["renames"] = {{"left_nodes", map_json(u.renames.left_nodes)},
                         {"right_nodes", map_json(u.renames.right_nodes)},
                         {"left_variables", map_json(u.renames.left_variables)},
                         {"right_variables", map_json(u.renames.right_variables)}};
  r.result["link_variables"] = u.link_variables;
  r.result["variables"] = u.model.variables();
  r.result["nodes"] = u.model.nodes.size();
  r.result["constraints"] = u.model.constraints.size();
  r.result["soundness"] = "sound";
  if (!a.output.empty()) {
    save_model_file(u.model, a.output);
    r.result["output"] = a.output;
  }
  r.stats = solver_json(*oracle);
  r.warnings = u.warnings;
  emit(r, g, out);
  return kSuccess;
}

// ---------------------------------------------------------------------------
// sensitivity

struct SensitivityArgs {
  std::string hypothesis;
  std::string evidence;
  std::string name = "s";
  std::string output;
  std::string csv;
  std::size_t samples = 101;
  std::string range = "0:1";
  bool bounds = false;
  std::string delta = "1e-6";
};

/// Grid over one variable; keeps points where every constraint over that
/// variable alone holds and D_s is nonzero.
std::size_t write_samples(const SensitivityResult& s, const ConstrainedBN& b, const SensitivityArgs& a,
                          const std::string& var, std::ostream& csv) {
  auto colon = a.range.find(':');
  if (colon == std::string::npos) throw UsageError("--range must be lo:hi");
  auto lo = parse_rational(a.range.substr(0, colon));
  auto hi = parse_rational(a.range.substr(colon + 1));
  if (hi < lo || a.samples < 2) throw UsageError("--range needs lo <= hi and --samples >= 2");
  std::vector<Constraint> local;
  for (const auto& c : b.constraints) {
    auto vs = c.variables();
    if (vs.size() == 1 && *vs.begin() == var) local.push_back(c);
  }
  csv << var << "," << s.variable << "\n";
  std::size_t written = 0;
  for (std::size_t i = 0; i < a.samples; ++i) {
    Rational v = lo + (hi - lo) * Rational(static_cast<long>(i), static_cast<long>(a.samples - 1));
    v.canonicalize();
    Assignment at{{var, v}};
    if (!std::all_of(local.begin(), local.end(), [&](const Constraint& c) { return holds(c, at); })) continue;
    if (s.denominator.evaluate(at) == 0) continue;
    csv << to_decimal(v, 12) << "," << to_decimal(s.closed_form.evaluate(at), 15) << "\n";
    ++written;
  }
  return written;
}

int cmd_sensitivity(const std::string& path, const SensitivityArgs& a, const Globals& g, std::ostream& out) {
  auto b = load(path, g);
  auto [hn, hs] = parse_event(a.hypothesis);
  auto [en, es] = parse_event(a.evidence);
  SensitivitySpec spec{hn, hs, en, es};
  auto oracle = make_solver(g);
  Report r;
  r.command = "sensitivity";
  r.inputs = {{"model", path}, {"hypothesis", a.hypothesis}, {"evidence", a.evidence}, {"variable", a.name}};
  SensitivityResult s;
  try {
    s = sensitivity_value(b, spec, a.name, oracle.get(), inference_options(g));
  } catch (const ModelError& e) {
    if (std::string(e.what()).find("undefined") == std::string::npos) throw;
    r.model_hash = model_hash(b);
    r.outcome = "undefined";
    r.result = {{"reason", e.what()}};
    r.stats = solver_json(*oracle);
    emit(r, g, out);
    return kFails;
  }
  r.model_hash = model_hash(b);
  r.outcome = "ok";
  r.result["closed_form"] = to_string(s.closed_form.to_term());
  r.result["components"] = {{"PO", to_string(s.po.to_term())},
                            {"Px", to_string(s.px.to_term())},
                            {"POx", to_string(s.pox.to_term())},
                            {"PxO", to_string(s.pxo.to_term())}};
  r.result["constraints"] = constraints_json(s.constraints);
  r.stats = {{"largest_clique", s.largest_clique}};

  if (a.bounds) {
    auto delta = parse_rational(a.delta);
    if (delta <= 0) throw UsageError("--delta must be positive");
    auto t = Term::var(s.variable);
    auto hi = sup_star(t, delta, s.model, *oracle);
    auto lo = inf_star(t, delta, s.model, *oracle);
    r.result["sup"] = interval_json(hi, g.deterministic);
    r.result["inf"] = interval_json(lo, g.deterministic);
    for (const auto& w : hi.warnings) r.warnings.push_back("sup: " + w);
    for (const auto& w : lo.warnings) r.warnings.push_back("inf: " + w);
  }
  if (!a.csv.empty()) {
    auto vars = s.closed_form.num().variables();
    for (const auto& v : s.closed_form.den().variables())
      if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
    if (vars.size() > 1) throw UsageError("CSV samples need a closed form in one variable");
    std::ofstream f(a.csv, std::ios::binary);
    if (!f) throw UsageError("cannot write " + a.csv);
    std::string var = vars.empty() ? (b.x_vars.empty() ? "x" : *b.x_vars.begin()) : vars.front();
    r.result["samples"] = {{"path", a.csv}, {"rows", write_samples(s, b, a, var, f)}};
  }
  if (!a.output.empty()) {
    save_model_file(s.model, a.output);
    r.result["output"] = a.output;
  }
  r.stats.update(solver_json(*oracle));
  emit(r, g, out);
  return kSuccess;
}

// ---------------------------------------------------------------------------
// gen-random

int cmd_gen_random(const GeneratorOptions& options, const std::string& output, const Globals& g, std::ostream& out) {
  if (options.nodes == 0 || options.x_vars == 0) throw UsageError("--nodes and --vars must be positive");
  GeneratedModel gen;
  try {
    gen = generate_random(g.seed, options);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (output.empty()) {
    out << save_model(gen.model);
    return kSuccess;
  }
  save_model_file(gen.model, output);
  Report r;
  r.command = "gen-random";
  r.model_hash = model_hash(gen.model);
  r.inputs = {{"seed", g.seed}, {"nodes", options.nodes}, {"vars", options.x_vars},
              {"min_states", options.min_states}, {"max_states", options.max_states},
              {"max_parents", options.max_parents}};
  r.outcome = "ok";
  Json ev = Json::object();
  for (const auto& [n, s] : gen.suggested.evidence) ev[n] = s;
  r.result = {{"output", output},
              {"suggested_marginal",
               {{"mp", gen.marginal_name}, {"node", gen.suggested.target_node},
                {"state", gen.suggested.target_state}, {"evidence", ev}}}};
  emit(r, g, out);
  return kSuccess;
}

// ---------------------------------------------------------------------------
// stress

struct StressArgs {
  std::size_t models = 100;
  std::size_t min_nodes = 3;
  std::size_t max_nodes = 12;
  std::size_t max_vars = 3;
  std::size_t max_states = 10;
  std::size_t max_parents = 3;
  std::size_t clique_cap = 100'000;
  unsigned jobs = 1;
  std::string csv;
};

struct StressRow {
  std::size_t nodes = 0, x_vars = 0, total_states = 0, marginal_len = 0;
  double seconds = 0;
  std::string error;  // set when the model did not complete
};

StressRow stress_one(std::uint64_t seed, const GeneratorOptions& options, const InferenceOptions& inference) {
  StressRow row;
  auto gen = generate_random(seed, options);
  row.nodes = gen.model.nodes.size();
  row.x_vars = gen.model.x_vars.size();
  for (const auto& n : gen.model.nodes) row.total_states += n.states.size();
  try {
    auto start = std::chrono::steady_clock::now();
    auto def = symbolic_marginal(gen.model, gen.suggested, gen.marginal_name, inference);
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (const auto& c : def.constraints) row.marginal_len += to_string(c).size();
  } catch (const CapExceeded& e) {
    row.error = std::string(e.what()) + " (" + std::to_string(e.size()) + " entries)";
  }
  return row;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  auto n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

int cmd_stress(const StressArgs& a, const Globals& g, std::ostream& out) {
  if (a.models == 0 || a.min_nodes == 0 || a.max_nodes < a.min_nodes || a.max_vars == 0 || a.jobs == 0)
    throw UsageError("stress needs positive counts and min-nodes <= max-nodes");
  // Per-model parameters are drawn sequentially so they do not depend on --jobs.
  SplitMix64 rng(g.seed);
  std::vector<std::pair<std::uint64_t, GeneratorOptions>> plan;
  for (std::size_t i = 0; i < a.models; ++i) {
    GeneratorOptions o;
    o.nodes = rng.uniform(a.min_nodes, a.max_nodes);
    o.x_vars = rng.uniform(1, a.max_vars);
    o.min_states = 1;
    o.max_states = a.max_states;
    o.max_parents = a.max_parents;
    plan.emplace_back(rng.next(), o);
  }
  InferenceOptions inference = inference_options(g);
  inference.clique_cap = a.clique_cap;

  std::vector<StressRow> rows(plan.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < plan.size();) rows[i] = stress_one(plan[i].first, plan[i].second, inference);
  };
  auto start = std::chrono::steady_clock::now();
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < a.jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  double total_ms = elapsed_ms(start);

  std::ostringstream csv;
  csv << "nodes,x_vars,total_states,marginal_len,seconds\n";
  csv << std::setprecision(6) << std::fixed;
  Report r;
  r.command = "stress";
  r.inputs = {{"seed", g.seed},           {"models", a.models},         {"min_nodes", a.min_nodes},
              {"max_nodes", a.max_nodes}, {"max_vars", a.max_vars},     {"max_states", a.max_states},
              {"max_parents", a.max_parents}, {"clique_cap", a.clique_cap}};
  struct Bucket {
    const char* label;
    std::size_t lo, hi;
    std::vector<double> times;
  };
  std::vector<Bucket> buckets{{"3-5", 3, 5, {}}, {"6-8", 6, 8, {}}, {"9-12", 9, 12, {}}};
  std::size_t completed = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (!row.error.empty()) {
      r.warnings.push_back("model " + std::to_string(i) + ": " + row.error);
      continue;
    }
    ++completed;
    csv << row.nodes << "," << row.x_vars << "," << row.total_states << "," << row.marginal_len << ","
        << row.seconds << "\n";
    for (auto& bk : buckets)
      if (row.nodes >= bk.lo && row.nodes <= bk.hi) bk.times.push_back(row.seconds);
  }
  Json medians = Json::object();
  std::optional<double> previous;
  bool monotone = true;
  std::vector<std::string> deviations;
  for (const auto& bk : buckets) {
    if (bk.times.empty()) continue;
    double m = median(bk.times);
    medians[bk.label] = {{"models", bk.times.size()}, {"median_seconds", m}};
    if (previous && m < *previous) {
      monotone = false;
      deviations.push_back(std::string("median of bucket ") + bk.label + " below the previous bucket");
    }
    previous = m;
  }
  if (!a.csv.empty()) {
    std::ofstream f(a.csv, std::ios::binary);
    if (!f) throw UsageError("cannot write " + a.csv);
    f << csv.str();
  }
  r.outcome = completed == rows.size() ? "ok" : "incomplete";
  r.result = {{"completed", completed}, {"csv", a.csv.empty() ? Json(nullptr) : Json(a.csv)}};
  if (!g.deterministic) {
    r.result["bucket_medians"] = medians;
    r.result["median_nondecreasing"] = monotone;
    r.stats = {{"jobs", a.jobs}, {"wall_time_ms", total_ms}};
  }
  for (const auto& d : deviations) r.warnings.push_back("deviation: " + d);
  if (a.csv.empty()) out << csv.str();
  emit(r, g, out);
  return completed == rows.size() ? kSuccess : kFails;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Constrained Bayesian network analysis", "cbn"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--solver", g.solver, "SMT-LIB solver command (default $CBN_SOLVER, then z3)");
  app.add_option("--timeout", g.timeout, "Seconds per satisfiability check")->capture_default_str();
  app.add_option("--seed", g.seed, "Seed for the solver and generators")->capture_default_str();
  app.add_option("--report", g.report_path, "Also write the JSON report here");
  app.add_flag("--no-denominator-guard", g.no_denominator_guard, "Omit D > 0 from conditional marginal definitions");
  app.add_flag("--deterministic", g.deterministic, "Omit timings so reports are byte-reproducible");

  std::string model;
  auto* validate = app.add_subcommand("validate", "Well-formedness, soundness and consistency");
  validate->add_option("model", model, "Model file")->required();

  std::string mode, phi;
  auto* judge = app.add_subcommand("judge", "may or must judgment of a formula");
  judge->add_option("model", model, "Model file")->required();
  judge->add_option("--mode", mode, "may or must")->required()->check(CLI::IsMember({"may", "must"}));
  judge->add_option("--phi", phi, "Formula")->required();

  BoundArgs bound;
  auto add_bound = [&](const char* name, const char* help) {
    auto* sc = app.add_subcommand(name, help);
    sc->add_option("model", model, "Model file")->required();
    sc->add_option("--term", bound.term, "Term to optimize")->required();
    sc->add_option("--delta", bound.delta, "Interval width bound")->capture_default_str();
    sc->add_flag("--plain", bound.plain, "Run the unstarred algorithm");
    sc->add_flag("--check-invariants", bound.check_invariants, "Re-check bracket invariants");
    return sc;
  };
  auto* sup_cmd = add_bound("sup", "Bracket the supremum of a term");
  auto* inf_cmd = add_bound("inf", "Bracket the infimum of a term");

  MarginalArgs marginal;
  auto* marginal_cmd = app.add_subcommand("marginal", "Symbolic marginal as defining constraints");
  marginal_cmd->add_option("model", model, "Model file")->required();
  marginal_cmd->add_option("--name", marginal.name, "Marginal variable");
  marginal_cmd->add_option("--node", marginal.node, "Target node");
  marginal_cmd->add_option("--state", marginal.state, "Target state");
  marginal_cmd->add_option("--evidence", marginal.evidence, "node=state (repeatable)");
  marginal_cmd->add_option("-o,--output", marginal.output, "Write the model with the marginal installed");

  ComposeArgs compose;
  auto* compose_cmd = app.add_subcommand("compose", "Constrained union of two models");
  compose_cmd->add_option("--left", compose.left, "Left model")->required();
  compose_cmd->add_option("--right", compose.right, "Right model")->required();
  compose_cmd->add_option("--link", compose.links, "Link constraint (repeatable)");
  compose_cmd->add_option("--policy", compose.policy, "reject or suffix")->capture_default_str();
  compose_cmd->add_option("--left-tag", compose.left_tag)->capture_default_str();
  compose_cmd->add_option("--right-tag", compose.right_tag)->capture_default_str();
  compose_cmd->add_option("-o,--output", compose.output, "Write the union model");

  SensitivityArgs sens;
  auto* sens_cmd = app.add_subcommand("sensitivity", "Closed-form sensitivity value");
  sens_cmd->add_option("model", model, "Model file")->required();
  sens_cmd->add_option("--hypothesis", sens.hypothesis, "node=state")->required();
  sens_cmd->add_option("--evidence", sens.evidence, "node=state")->required();
  sens_cmd->add_option("--name", sens.name, "Sensitivity variable")->capture_default_str();
  sens_cmd->add_option("-o,--output", sens.output, "Write the model with the variable defined");
  sens_cmd->add_option("--csv", sens.csv, "Write (x, s(x)) samples");
  sens_cmd->add_option("--samples", sens.samples)->capture_default_str();
  sens_cmd->add_option("--range", sens.range, "lo:hi")->capture_default_str();
  sens_cmd->add_flag("--bounds", sens.bounds, "Bracket sup and inf of the value");
  sens_cmd->add_option("--delta", sens.delta)->capture_default_str();

  GeneratorOptions gen;
  std::string gen_output;
  auto* gen_cmd = app.add_subcommand("gen-random", "Random constrained network (uses --seed)");
  gen_cmd->add_option("--nodes", gen.nodes)->capture_default_str();
  gen_cmd->add_option("--vars", gen.x_vars)->capture_default_str();
  gen_cmd->add_option("--min-states", gen.min_states)->capture_default_str();
  gen_cmd->add_option("--max-states", gen.max_states)->capture_default_str();
  gen_cmd->add_option("--max-parents", gen.max_parents)->capture_default_str();
  gen_cmd->add_option("-o,--output", gen_output, "Model file (stdout when absent)");

  StressArgs stress;
  auto* stress_cmd = app.add_subcommand("stress", "Time the symbolic JTA on generated models");
  stress_cmd->add_option("--models", stress.models)->capture_default_str();
  stress_cmd->add_option("--min-nodes", stress.min_nodes)->capture_default_str();
  stress_cmd->add_option("--max-nodes", stress.max_nodes)->capture_default_str();
  stress_cmd->add_option("--max-vars", stress.max_vars)->capture_default_str();
  stress_cmd->add_option("--max-states", stress.max_states)->capture_default_str();
  stress_cmd->add_option("--max-parents", stress.max_parents)->capture_default_str();
  stress_cmd->add_option("--clique-cap", stress.clique_cap)->capture_default_str();
  stress_cmd->add_option("--jobs", stress.jobs)->capture_default_str();
  stress_cmd->add_option("--csv", stress.csv, "CSV path (stdout when absent)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "cbn: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(model, g, out);
    if (judge->parsed()) return cmd_judge(model, mode, phi, g, out);
    if (sup_cmd->parsed()) return cmd_bound("sup", model, bound, g, out);
    if (inf_cmd->parsed()) return cmd_bound("inf", model, bound, g, out);
    if (marginal_cmd->parsed()) return cmd_marginal(model, marginal, g, out);
    if (compose_cmd->parsed()) return cmd_compose(compose, g, out);
    if (sens_cmd->parsed()) return cmd_sensitivity(model, sens, g, out);
    if (gen_cmd->parsed()) return cmd_gen_random(gen, gen_output, g, out);
    if (stress_cmd->parsed()) return cmd_stress(stress, g, out);
  } catch (const UsageError& e) {
    err << "cbn: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    err << "cbn: " << e.what() << "\n";
    return kUsage;
  } catch (const UnsupportedQuery& e) {
    err << "cbn: " << e.what() << "\n";
    return kUsage;
  } catch (const ModelError& e) {
    err << "cbn: " << e.what() << "\n";
    return kUsage;
  } catch (const SolverError& e) {
    err << "cbn: solver: " << e.what() << "\n";
    return kUnknown;
  } catch (const std::exception& e) {
    err << "cbn: " << e.what() << "\n";
    return kFails;
  }
  return kUsage;
}

}  // namespace cbn::cli
