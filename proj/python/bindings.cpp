#include <fstream>
#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "execdesc/executor.hpp"
#include "execdesc/heuristics.hpp"
#include "execdesc/library.hpp"
#include "execdesc/planner.hpp"
#include "execdesc/purpose.hpp"
#include "execdesc/rdf_xml.hpp"
#include "execdesc/vocab.hpp"

namespace py = pybind11;
using namespace execdesc;
using rdf::Iri;

namespace {

std::vector<std::string> strings(const std::vector<Iri> &iris) {
  std::vector<std::string> out;
  for (const auto &i : iris) out.push_back(i.value);
  return out;
}

std::vector<Iri> iris(const std::vector<std::string> &values) {
  std::vector<Iri> out;
  for (const auto &v : values) out.push_back(Iri{v});
  return out;
}

py::dict purpose_dict(const purpose::Purpose &p) {
  py::dict d;
  d["summary"] = purpose::summarize(p);
  std::visit(
      [&](const auto &x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, purpose::Label>) {
          d["kind"] = "label";
          d["text"] = x.text;
          d["language"] = x.language;
        } else if constexpr (std::is_same_v<T, purpose::EvidenceFor>) {
          d["kind"] = "evidence";
          d["document"] = x.document.value;
        } else if constexpr (std::is_same_v<T, purpose::GeneratesFigure>) {
          d["kind"] = "figure";
          d["title"] = x.title ? py::cast(*x.title) : py::none();
          d["document"] = x.part_of ? py::cast(x.part_of->value) : py::none();
        } else {
          d["kind"] = "claim";
          if (const auto *r = std::get_if<purpose::RemoteClaim>(&x.target)) {
            d["claim"] = r->claim.value;
          } else {
            const auto &c = std::get<purpose::InlineClaim>(x.target);
            d["claim"] = py::make_tuple(c.subject.value, c.predicate.value, c.object.value);
          }
        }
      },
      p);
  return d;
}

py::dict process_dict(const ProcessDescriptor &p) {
  py::list purposes, parameters;
  for (const auto &x : p.purposes) purposes.append(purpose_dict(x));
  for (const auto &s : p.parameters) {
    py::dict d;
    d["name"] = s.name;
    d["kind"] = s.kind == ParameterKind::NumericRange ? "numeric-range"
                : s.kind == ParameterKind::Enumeration ? "enumeration"
                                                       : "unconstrained";
    d["min"] = s.min ? py::cast(*s.min) : py::none();
    d["max"] = s.max ? py::cast(*s.max) : py::none();
    d["allowed"] = s.allowed;
    parameters.append(d);
  }
  py::dict d;
  d["id"] = p.id.value;
  d["command"] = p.command.raw;
  d["placeholders"] = p.command.placeholders;
  d["depends_on"] = strings(p.depends_on);
  d["purposes"] = purposes;
  d["parameters"] = parameters;
  return d;
}

py::list diagnostics_list(const std::vector<Diagnostic> &diagnostics) {
  py::list out;
  for (const auto &x : diagnostics) {
    py::dict d;
    d["severity"] = std::string(to_string(x.severity));
    d["code"] = x.code;
    d["subject"] = x.subject ? py::cast(x.subject->value) : py::none();
    d["message"] = x.message;
    out.append(d);
  }
  return out;
}

purpose::PurposeQuery query_from(const py::kwargs &kw) {
  if (kw.size() != 1) throw py::value_error("give exactly one of label, label_contains, document, figure, claim");
  auto [key, value] = *kw.begin();
  auto name = key.cast<std::string>();
  if (name == "label") return purpose::ByLabel{value.cast<std::string>(), purpose::LabelMatch::Exact};
  if (name == "label_contains") return purpose::ByLabel{value.cast<std::string>(), purpose::LabelMatch::Substring};
  if (name == "document") return purpose::ByDocument{Iri{value.cast<std::string>()}};
  if (name == "figure") {
    auto t = value.cast<py::tuple>();
    std::optional<std::string> title;
    if (t.size() > 1 && !t[1].is_none()) title = t[1].cast<std::string>();
    return purpose::ByFigure{Iri{t[0].cast<std::string>()}, title};
  }
  if (name == "claim") {
    if (py::isinstance<py::str>(value)) return purpose::ByClaim{purpose::RemoteClaim{Iri{value.cast<std::string>()}}};
    auto [s, p, o] = value.cast<std::tuple<std::string, std::string, std::string>>();
    return purpose::ByClaim{purpose::InlineClaim{Iri{s}, Iri{p}, Iri{o}}};
  }
  throw py::value_error("unknown selector " + name);
}

py::dict report_dict(const ExecutionReport &report) {
  py::list steps;
  for (const auto &s : report.steps) {
    py::dict d;
    d["process"] = s.process.value;
    d["command"] = s.bound_command;
    d["status"] = std::string(to_string(s.status));
    d["exit_code"] = s.exit_code ? py::cast(*s.exit_code) : py::none();
    d["blocked_by"] = s.blocked_by ? py::cast(s.blocked_by->value) : py::none();
    d["duration_ms"] = s.wall_time.count();
    d["stdout"] = s.stdout_path;
    d["stderr"] = s.stderr_path;
    steps.append(d);
  }
  py::dict d;
  d["overall"] = std::string(to_string(report.overall));
  d["steps"] = steps;
  return d;
}

} // namespace

PYBIND11_MODULE(_execdesc, m) {
  m.doc() = "Execution descriptions: parse, validate, plan, run, resolve";

  static py::exception<rdf::ParseError> parse_error(m, "ParseError", PyExc_ValueError);
  static py::exception<PlanError> plan_error(m, "PlanError", PyExc_ValueError);
  static py::exception<BindError> bind_error(m, "BindError", PyExc_ValueError);
  static py::exception<ExecutionError> execution_error(m, "ExecutionError", PyExc_RuntimeError);
  static py::exception<heuristics::ResolutionError> resolution_error(m, "ResolutionError", PyExc_LookupError);
  static py::exception<library::LibraryError> library_error(m, "LibraryError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const rdf::ParseError &e) {
      py::set_error(parse_error, e.what());
    } catch (const PlanError &e) {
      py::set_error(plan_error, e.what());
    } catch (const BindError &e) {
      py::set_error(bind_error, e.what());
    } catch (const ExecutionError &e) {
      py::set_error(execution_error, e.what());
    } catch (const heuristics::ResolutionError &e) {
      py::set_error(resolution_error, e.what());
    } catch (const library::LibraryError &e) {
      py::set_error(library_error, e.what());
    }
  });

  py::class_<ExecutionDescription>(m, "Description")
      .def_property_readonly("base", [](const ExecutionDescription &d) { return d.base.value; })
      .def_property_readonly("processes",
                             [](const ExecutionDescription &d) {
                               py::list out;
                               for (const auto &[_, p] : d.processes) out.append(process_dict(p));
                               return out;
                             })
      .def("validate",
           [](const ExecutionDescription &d, bool strict) {
             return diagnostics_list(validate(d, {.placeholders_are_errors = strict}));
           },
           py::arg("strict") = false)
      .def("select", [](const ExecutionDescription &d, const py::kwargs &kw) {
        return strings(purpose::select_processes(d, query_from(kw)));
      })
      .def("plan",
           [](const ExecutionDescription &d, const std::vector<std::string> &targets, const Bindings &bindings,
              bool strict) {
             auto plan = build_plan(d, iris(targets), bindings, strict);
             py::list steps;
             for (const auto &s : plan.steps) {
               py::dict step;
               step["process"] = s.process.value;
               step["command"] = s.bound_command;
               step["depends_on"] = strings(s.depends_on);
               steps.append(step);
             }
             return steps;
           },
           py::arg("targets"), py::arg("bindings") = Bindings{}, py::arg("strict") = false)
      .def("run",
           [](const ExecutionDescription &d, const std::vector<std::string> &targets, const Bindings &bindings,
              const std::filesystem::path &working_dir, bool dry_run, bool keep_going, unsigned jobs) {
             auto plan = build_plan(d, iris(targets), bindings);
             RunOptions options;
             options.working_dir = working_dir;
             options.dry_run = dry_run;
             options.keep_going = keep_going;
             options.max_parallel = jobs;
             ExecutionReport report;
             {
               py::gil_scoped_release release;
               report = execute_plan(plan, options);
             }
             return report_dict(report);
           },
           py::arg("targets"), py::arg("bindings") = Bindings{}, py::arg("working_dir") = ".",
           py::arg("dry_run") = false, py::arg("keep_going") = false, py::arg("jobs") = 1u)
      .def("to_rdf_xml", [](const ExecutionDescription &d) { return rdf::serialize_rdf_xml(d.source_graph); });

  m.def("load", [](const std::string &document, const std::string &base) { return load_description(document, Iri{base}); },
        py::arg("document"), py::arg("base"), "Parse RDF/XML and extract its processes.");
  m.def("load_file",
        [](const std::filesystem::path &file) {
          std::ifstream in(file, std::ios::binary);
          if (!in) throw py::value_error("cannot read " + file.string());
          std::ostringstream text;
          text << in.rdbuf();
          return load_description(text.str(), rdf::file_iri(std::filesystem::absolute(file).string()));
        },
        py::arg("path"));
  m.def("triples",
        [](const std::string &document, const std::string &base) {
          std::vector<std::tuple<std::string, std::string, std::string>> out;
          for (const auto &t : rdf::parse_rdf_xml(document, Iri{base})) {
            out.emplace_back(rdf::to_ntriples(t.subject), rdf::to_ntriples(t.predicate), rdf::to_ntriples(t.object));
          }
          return out;
        },
        py::arg("document"), py::arg("base"), "Triples in N-Triples notation, sorted.");
  m.def("placeholders", [](const std::string &command) { return placeholders(command); });

  m.def("guess",
        [](const std::filesystem::path &dir) -> py::object {
          auto g = heuristics::guess(dir, heuristics::default_rule_table());
          if (!g) return py::none();
          return py::make_tuple(g->rule.name, g->rule.command);
        },
        py::arg("dir"), "(rule, command) for the first default rule that matches, or None.");
  m.def("resolve",
        [](const std::filesystem::path &dir, const std::vector<std::string> &libraries,
           const std::optional<std::string> &repo_url) {
          auto outcome = heuristics::resolve(dir, libraries, heuristics::default_rule_table(), repo_url);
          return py::make_tuple(heuristics::source_tag(outcome), outcome.description);
        },
        py::arg("dir"), py::arg("libraries") = std::vector<std::string>{}, py::arg("repo_url") = py::none());

  m.def("normalize_repo", [](const std::string &url) { return library::RepoKey::normalize(url).str(); });
  m.attr("__version__") = "0.1.0";
}
