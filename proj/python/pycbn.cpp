#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cbn/compose.hpp"
#include "cbn/generate.hpp"
#include "cbn/inference.hpp"
#include "cbn/logic.hpp"
#include "cbn/model.hpp"
#include "cbn/optimize.hpp"
#include "cbn/sensitivity.hpp"

namespace py = pybind11;
using namespace cbn;

namespace {

py::object fraction(const Rational& r) {
  static py::object cls = py::module_::import("fractions").attr("Fraction");
  return cls(r.get_str());
}

Rational to_rational(const py::handle& value) {
  if (py::isinstance<py::str>(value)) {
    auto text = value.cast<std::string>();
    if (text.find('/') == std::string::npos) return parse_decimal(text);
    Rational r(text);
    r.canonicalize();
    return r;
  }
  // int, float and Fraction all print an exact numerator/denominator pair
  auto ratio = py::module_::import("fractions").attr("Fraction")(value);
  Rational r(py::str(ratio.attr("numerator")).cast<std::string>() + "/" +
             py::str(ratio.attr("denominator")).cast<std::string>());
  r.canonicalize();
  return r;
}

py::dict witness_dict(const Witness& w) {
  py::dict values;
  for (const auto& [name, v] : w.values) values[py::str(name)] = fraction(v);
  py::dict d;
  d["values"] = values;
  d["residual"] = fraction(w.residual);
  return d;
}

std::unique_ptr<SmtLibSolver> solver_for(const std::optional<std::string>& command, double timeout) {
  SolverConfig config;
  config.command = resolve_solver_command(command);
  config.timeout = std::chrono::milliseconds(static_cast<long long>(timeout * 1000));
  return std::make_unique<SmtLibSolver>(config);
}

py::dict interval_dict(const IntervalResult& r) {
  py::dict d;
  d["outcome"] = to_string(r.outcome);
  d["low"] = fraction(r.low);
  d["high"] = fraction(r.high);
  d["witness"] = r.witness ? py::object(witness_dict(*r.witness)) : py::none();
  d["algorithm"] = r.stats.algorithm;
  d["sat_checks"] = r.stats.sat_checks;
  d["bound"] = r.stats.bound ? py::object(py::float_(*r.stats.bound)) : py::none();
  d["warnings"] = r.warnings;
  d["reason"] = r.reason;
  return d;
}

std::vector<std::string> texts(const std::vector<Constraint>& cs) {
  std::vector<std::string> out;
  for (const auto& c : cs) out.push_back(to_string(c));
  return out;
}

InferenceOptions inference(bool guard) {
  InferenceOptions o;
  o.denominator_guard = guard;
  return o;
}

}  // namespace

PYBIND11_MODULE(_pycbn, m) {
  m.doc() = "Constrained Bayesian networks: symbolic marginals, judgments, optimization";

  py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<UnsupportedQuery>(m, "UnsupportedQuery", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  py::class_<ConstrainedBN>(m, "Model")
      .def_static(
          "from_json",
          [](const std::string& text, bool guard) {
            auto b = load_model(text);
            ensure_marginal_definitions(b, inference(guard));
            return b;
          },
          py::arg("text"), py::arg("denominator_guard") = true)
      .def("to_json", [](const ConstrainedBN& b) { return save_model(b); })
      .def("save", [](const ConstrainedBN& b, const std::string& path) { save_model_file(b, path); })
      .def_property_readonly("nodes",
                             [](const ConstrainedBN& b) {
                               std::vector<std::string> names;
                               for (const auto& n : b.nodes) names.push_back(n.name);
                               return names;
                             })
      .def_property_readonly("variables", &ConstrainedBN::variables)
      .def_property_readonly("x_vars", [](const ConstrainedBN& b) { return b.x_vars; })
      .def_property_readonly("mp_vars", [](const ConstrainedBN& b) { return b.mp_vars; })
      .def_property_readonly("constraints", [](const ConstrainedBN& b) { return texts(b.constraints); })
      .def("__repr__", [](const ConstrainedBN& b) {
        return "<Model " + std::to_string(b.nodes.size()) + " nodes, " + std::to_string(b.variables().size()) +
               " variables>";
      });

  m.def(
      "load_model",
      [](const std::string& path, bool guard) {
        auto b = load_model_file(path);
        ensure_marginal_definitions(b, inference(guard));
        return b;
      },
      py::arg("path"), py::arg("denominator_guard") = true, "Load a model and generate missing marginal definitions.");

  m.def(
      "validate",
      [](const ConstrainedBN& b, std::optional<std::string> solver, double timeout) {
        auto oracle = solver_for(solver, timeout);
        py::list violations;
        for (const auto& v : validate_well_formed(b)) violations.append(py::make_tuple(v.variable, v.rule));
        auto sound = check_sound(b, *oracle);
        auto consistent = check_consistent(b, *oracle);
        py::dict d;
        d["violations"] = violations;
        d["sound"] = sound.status == Soundness::Sound     ? "sound"
                     : sound.status == Soundness::Unsound ? "unsound"
                                                           : "unknown";
        d["consistent"] = to_string(consistent.status);
        return d;
      },
      py::arg("model"), py::arg("solver") = py::none(), py::arg("timeout") = 60.0);

  m.def(
      "marginal",
      [](const ConstrainedBN& b, const std::string& node, const std::string& state,
         const std::map<std::string, std::string>& evidence, const std::string& name, bool guard) {
        auto def = symbolic_marginal(b, {node, state, evidence}, name, inference(guard));
        py::dict d;
        d["mp"] = def.mp;
        d["numerator"] = to_string(def.numerator);
        d["denominator"] = to_string(def.denominator);
        d["constraints"] = texts(def.constraints);
        d["largest_clique"] = def.largest_clique;
        return d;
      },
      py::arg("model"), py::arg("node"), py::arg("state"), py::arg("evidence") = std::map<std::string, std::string>{},
      py::arg("name") = "mp", py::arg("denominator_guard") = true);

  m.def(
      "install_marginal",
      [](const ConstrainedBN& b, const std::string& name, const std::string& node, const std::string& state,
         const std::map<std::string, std::string>& evidence) { return install_marginal(b, {node, state, evidence}, name); },
      py::arg("model"), py::arg("name"), py::arg("node"), py::arg("state"),
      py::arg("evidence") = std::map<std::string, std::string>{});

  m.def(
      "judge",
      [](const ConstrainedBN& b, const std::string& mode, const std::string& phi, std::optional<std::string> solver,
         double timeout) {
        auto oracle = solver_for(solver, timeout);
        Judgment j;
        if (mode == "may")
          j = judge_may(b, parse_query(phi), *oracle);
        else if (mode == "must")
          j = judge_must(b, parse_query(phi), *oracle);
        else
          throw py::value_error("mode must be 'may' or 'must'");
        py::dict d;
        d["truth"] = to_string(j.truth);
        d["witness"] = j.witness ? py::object(witness_dict(*j.witness)) : py::none();
        d["warnings"] = j.warnings;
        d["reason"] = j.reason;
        return d;
      },
      py::arg("model"), py::arg("mode"), py::arg("phi"), py::arg("solver") = py::none(), py::arg("timeout") = 60.0);

  auto bound = [](bool upper) {
    return [upper](const ConstrainedBN& b, const std::string& term, const py::object& delta, bool starred,
                   std::optional<std::string> solver, double timeout) {
      auto oracle = solver_for(solver, timeout);
      auto t = parse_term(term);
      auto d = to_rational(delta);
      if (d <= 0) throw py::value_error("delta must be positive");
      IntervalResult r = upper ? (starred ? sup_star(t, d, b, *oracle) : sup(t, d, b, *oracle))
                               : (starred ? inf_star(t, d, b, *oracle) : inf(t, d, b, *oracle));
      return interval_dict(r);
    };
  };
  m.def("sup", bound(true), py::arg("model"), py::arg("term"), py::arg("delta") = "1e-9", py::arg("starred") = true,
        py::arg("solver") = py::none(), py::arg("timeout") = 60.0, "Bracket the supremum of a term.");
  m.def("inf", bound(false), py::arg("model"), py::arg("term"), py::arg("delta") = "1e-9", py::arg("starred") = true,
        py::arg("solver") = py::none(), py::arg("timeout") = 60.0, "Bracket the infimum of a term.");

  m.def(
      "compose",
      [](const ConstrainedBN& left, const ConstrainedBN& right, const std::vector<std::string>& links,
         const std::string& policy) {
        UnionRecipe recipe{left, right};
        for (const auto& l : links) recipe.links.push_back(parse_constraint(l));
        if (policy == "suffix")
          recipe.policy = RenamePolicy::AutoSuffix;
        else if (policy != "reject")
          throw py::value_error("policy must be 'reject' or 'suffix'");
        auto u = constrained_union(recipe);
        py::dict renames;
        renames["left_nodes"] = u.renames.left_nodes;
        renames["right_nodes"] = u.renames.right_nodes;
        renames["left_variables"] = u.renames.left_variables;
        renames["right_variables"] = u.renames.right_variables;
        return py::make_tuple(u.model, renames);
      },
      py::arg("left"), py::arg("right"), py::arg("links") = std::vector<std::string>{}, py::arg("policy") = "reject");

  m.def(
      "sensitivity",
      [](const ConstrainedBN& b, std::pair<std::string, std::string> hypothesis,
         std::pair<std::string, std::string> evidence, const std::string& name) {
        auto s = sensitivity_value(b, {hypothesis.first, hypothesis.second, evidence.first, evidence.second}, name);
        py::dict d;
        d["closed_form"] = to_string(s.closed_form.to_term());
        d["constraints"] = texts(s.constraints);
        d["model"] = s.model;
        return d;
      },
      py::arg("model"), py::arg("hypothesis"), py::arg("evidence"), py::arg("name") = "s");

  m.def(
      "sensitivity_formula",
      [](const py::object& po, const py::object& px, const py::object& pox, const py::object& pxo) {
        return fraction(sensitivity_formula(to_rational(po), to_rational(px), to_rational(pox), to_rational(pxo)));
      },
      py::arg("po"), py::arg("px"), py::arg("pox"), py::arg("pxo"));

  m.def(
      "generate_random",
      [](std::uint64_t seed, std::size_t nodes, std::size_t vars) {
        GeneratorOptions o;
        o.nodes = nodes;
        o.x_vars = vars;
        auto g = generate_random(seed, o);
        ensure_marginal_definitions(g.model);
        return py::make_tuple(g.model, g.marginal_name);
      },
      py::arg("seed"), py::arg("nodes") = 5, py::arg("vars") = 2);

  m.def(
      "evaluate",
      [](const std::string& term, const std::map<std::string, py::object>& values) {
        Assignment a;
        for (const auto& [k, v] : values) a[k] = to_rational(v);
        return fraction(evaluate(parse_term(term), a));
      },
      py::arg("term"), py::arg("values"));
}
