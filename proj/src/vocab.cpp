#include "execdesc/vocab.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "detail/cycles.hpp"
#include "execdesc/terms.hpp"

namespace execdesc {

namespace {

using rdf::Graph;
using rdf::Iri;
using rdf::Literal;
using rdf::Node;
using rdf::Term;

bool name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::optional<double> parse_number(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size() || text.empty() || !std::isfinite(value))
    return std::nullopt;
  return value;
}

std::string format_number(double value) {
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, end);
}

std::vector<Term> objects_any(const Graph &graph, const Node &subject, const terms::Spellings &ps) {
  std::vector<Term> out;
  for (const auto &p : ps) {
    auto found = graph.objects(subject, p);
    out.insert(out.end(), found.begin(), found.end());
  }
  return out;
}

std::string subject_name(const Node &node) { return rdf::to_ntriples(node); }

std::vector<ParameterSpec> read_parameters(const Graph &graph, const Node &process,
                                           const std::optional<Iri> &owner,
                                           std::vector<Diagnostic> &notes) {
  std::vector<ParameterSpec> out;
  auto note = [&](std::string message) {
    notes.push_back({Severity::Error, "INVALID_PARAMETER", owner, std::move(message)});
  };
  for (const auto &term : objects_any(graph, process, terms::parameter())) {
    auto node = rdf::as_node(term);
    if (!node) {
      note("wfdesc:Parameter must be a node carrying rdfs:label, got " + rdf::to_ntriples(term));
      continue;
    }
    ParameterSpec spec;
    for (const auto &t : graph.objects(*node, terms::rdfs_label())) {
      if (const auto *lit = std::get_if<Literal>(&t)) {
        spec.name = lit->lexical;
        break;
      }
    }
    if (spec.name.empty()) {
      note("parameter " + subject_name(*node) + " has no rdfs:label");
      continue;
    }
    auto read_bound = [&](const Iri &predicate, std::optional<double> &slot, const char *what) {
      for (const auto &t : graph.objects(*node, predicate)) {
        const auto *lit = std::get_if<Literal>(&t);
        auto value = lit ? parse_number(lit->lexical) : std::nullopt;
        if (!value) {
          note("parameter " + spec.name + ": " + what + " " + rdf::to_ntriples(t) + " is not a number");
          continue;
        }
        slot = value;
      }
    };
    read_bound(terms::min_value(), spec.min, "minValue");
    read_bound(terms::max_value(), spec.max, "maxValue");
    for (const auto &t : graph.objects(*node, terms::allowed_value())) {
      if (const auto *lit = std::get_if<Literal>(&t)) spec.allowed.push_back(lit->lexical);
    }
    std::sort(spec.allowed.begin(), spec.allowed.end());
    spec.allowed.erase(std::unique(spec.allowed.begin(), spec.allowed.end()), spec.allowed.end());

    bool ranged = spec.min || spec.max;
    if (ranged && !spec.allowed.empty()) {
      note("parameter " + spec.name + " has both numeric bounds and allowed values");
    }
    if (spec.min && spec.max && *spec.min > *spec.max) {
      note("parameter " + spec.name + " has minValue " + format_number(*spec.min) +
           " greater than maxValue " + format_number(*spec.max));
    }
    spec.kind = ranged ? ParameterKind::NumericRange
                       : (spec.allowed.empty() ? ParameterKind::Unconstrained
                                               : ParameterKind::Enumeration);
    if (std::any_of(out.begin(), out.end(), [&](const auto &p) { return p.name == spec.name; })) {
      note("parameter " + spec.name + " is declared more than once");
      continue;
    }
    out.push_back(std::move(spec));
  }
  std::sort(out.begin(), out.end(), [](const auto &a, const auto &b) { return a.name < b.name; });
  return out;
}

} // namespace

CommandTemplate CommandTemplate::from(std::string raw) {
  CommandTemplate t;
  t.placeholders = execdesc::placeholders(raw);
  t.raw = std::move(raw);
  return t;
}

std::vector<std::string> placeholders(std::string_view command) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i + 1 < command.size(); ++i) {
    if (command[i] != '$' || command[i + 1] != '{') continue;
    std::size_t j = i + 2;
    if (j >= command.size() || !name_start(command[j])) continue;
    while (j < command.size() && name_char(command[j])) ++j;
    if (j >= command.size() || command[j] != '}') continue;
    std::string name(command.substr(i + 2, j - i - 2));
    if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
    i = j;
  }
  return names;
}

const ParameterSpec *ProcessDescriptor::parameter(std::string_view name) const {
  auto it = std::find_if(parameters.begin(), parameters.end(),
                         [&](const ParameterSpec &p) { return p.name == name; });
  return it == parameters.end() ? nullptr : &*it;
}

std::string_view to_string(Severity severity) {
  return severity == Severity::Error ? "error" : "warning";
}

std::string format(const Diagnostic &d) {
  std::string out = std::string(to_string(d.severity)) + " " + d.code;
  if (d.subject) out += " <" + d.subject->value + ">";
  return out + ": " + d.message;
}

const ProcessDescriptor *ExecutionDescription::find(const Iri &id) const {
  auto it = processes.find(id);
  return it == processes.end() ? nullptr : &it->second;
}

ExecutionDescription extract(const Graph &graph) {
  ExecutionDescription description;
  description.base = graph.base();
  description.source_graph = graph;

  std::set<Node> candidates;
  for (const auto &t : graph.match(std::nullopt, rdf::rdf_type(), terms::process())) {
    candidates.insert(t.subject);
  }
  for (const auto &t : graph.match(std::nullopt, terms::command(), std::nullopt)) {
    candidates.insert(t.subject);
  }
  for (const auto &t : graph.match(std::nullopt, terms::purpose(), std::nullopt)) {
    candidates.insert(t.subject);
  }

  auto &notes = description.notes;
  for (const auto &node : candidates) {
    const auto *id = std::get_if<Iri>(&node);
    std::optional<Iri> owner = id ? std::optional<Iri>(*id) : std::nullopt;

    std::vector<std::string> commands;
    for (const auto &t : graph.objects(node, terms::command())) {
      if (const auto *lit = std::get_if<Literal>(&t)) commands.push_back(lit->lexical);
    }
    if (commands.empty()) {
      notes.push_back({Severity::Error, "MISSING_COMMAND", owner,
                       "process " + subject_name(node) + " has no ed:command literal"});
      continue;
    }
    if (!id) {
      notes.push_back({Severity::Warning, "ANONYMOUS_PROCESS", std::nullopt,
                       "process " + subject_name(node) + " (command \"" + commands.front() +
                           "\") has no IRI; give it an rdf:about to make it selectable"});
      continue;
    }
    if (commands.size() > 1) {
      notes.push_back({Severity::Error, "MULTIPLE_COMMANDS", owner,
                       "process has " + std::to_string(commands.size()) +
                           " ed:command values; using \"" + commands.front() + "\""});
    }

    ProcessDescriptor process;
    process.id = *id;
    process.command = CommandTemplate::from(commands.front());
    process.purposes = purpose::extract_purposes(graph, node, &notes);
    for (const auto &t : graph.objects(node, terms::depends_on())) {
      if (const auto *dep = std::get_if<Iri>(&t)) {
        process.depends_on.push_back(*dep);
      } else {
        notes.push_back({Severity::Error, "DANGLING_DEPENDENCY", owner,
                         "ed:dependsOn value " + rdf::to_ntriples(t) + " is not an IRI"});
      }
    }
    std::sort(process.depends_on.begin(), process.depends_on.end());
    process.depends_on.erase(std::unique(process.depends_on.begin(), process.depends_on.end()),
                             process.depends_on.end());
    process.parameters = read_parameters(graph, node, owner, notes);
    description.processes.emplace(process.id, std::move(process));
  }
  return description;
}

ExecutionDescription load_description(std::string_view document, const Iri &base) {
  std::vector<rdf::ParseWarning> warnings;
  auto graph = rdf::parse_rdf_xml(document, base, &warnings);
  auto description = extract(graph);
  for (const auto &w : warnings) {
    description.notes.push_back({Severity::Warning, w.code, std::nullopt,
                                 "line " + std::to_string(w.line) + ": " + w.message});
  }
  return description;
}

std::vector<Diagnostic> validate(const ExecutionDescription &description,
                                 const ValidationOptions &options) {
  std::vector<Diagnostic> out = description.notes;

  std::map<Iri, std::vector<Iri>> edges;
  for (const auto &[id, process] : description.processes) {
    auto &out_edges = edges[id];
    for (const auto &dep : process.depends_on) {
      if (!description.processes.contains(dep)) {
        out.push_back({Severity::Error, "DANGLING_DEPENDENCY", id,
                       "depends on <" + dep.value + ">, which is not a process in this document"});
      } else {
        out_edges.push_back(dep);
      }
    }
    for (const auto &name : process.command.placeholders) {
      if (process.parameter(name)) continue;
      out.push_back({options.placeholders_are_errors ? Severity::Error : Severity::Warning,
                     "UNDECLARED_PLACEHOLDER", id,
                     "placeholder ${" + name + "} has no parameter declaration"});
    }
  }

  for (const auto &cycle : detail::find_cycles(edges)) {
    std::string path;
    for (const auto &iri : cycle) path += (path.empty() ? "<" : " -> <") + iri.value + ">";
    out.push_back({Severity::Error, "DEPENDENCY_CYCLE", cycle.front(), "dependency cycle " + path});
  }

  std::stable_sort(out.begin(), out.end(), [](const Diagnostic &a, const Diagnostic &b) {
    return std::tie(a.severity, a.subject, a.code, a.message) <
           std::tie(b.severity, b.subject, b.code, b.message);
  });
  return out;
}

bool has_errors(const std::vector<Diagnostic> &diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic &d) { return d.severity == Severity::Error; });
}

void add_process(Graph &graph, const ProcessDescriptor &process) {
  using namespace purpose;
  const Node self{process.id};
  graph.insert({self, rdf::rdf_type(), terms::process()});
  graph.insert({self, terms::command(), Literal{process.command.raw, {}, std::nullopt}});
  for (const auto &dep : process.depends_on) graph.insert({self, terms::depends_on(), dep});

  for (const auto &p : process.purposes) {
    if (const auto *label = std::get_if<Label>(&p)) {
      graph.insert({self, terms::purpose(), Literal{label->text, label->language, std::nullopt}});
      continue;
    }
    auto node = graph.mint_blank();
    graph.insert({self, terms::purpose(), node});
    if (const auto *e = std::get_if<EvidenceFor>(&p)) {
      graph.insert({node, terms::cited_as_evidence_by().front(), e->document});
    } else if (const auto *f = std::get_if<GeneratesFigure>(&p)) {
      graph.insert({node, rdf::rdf_type(), terms::generated().front()});
      auto figure = graph.mint_blank();
      graph.insert({node, terms::figure().front(), figure});
      if (f->title) graph.insert({figure, terms::title().front(), Literal{*f->title, {}, std::nullopt}});
      if (f->part_of) graph.insert({figure, terms::is_part_of().front(), *f->part_of});
    } else {
      const auto &target = std::get<SupportsClaim>(p).target;
      if (const auto *remote = std::get_if<RemoteClaim>(&target)) {
        graph.insert({node, terms::supports().front(), remote->claim});
      } else {
        const auto &claim = std::get<InlineClaim>(target);
        graph.insert({node, rdf::rdf_type(), terms::supports().front()});
        auto statement = graph.mint_blank();
        graph.insert({node, terms::statement().front(), statement});
        graph.insert({statement, terms::claim_subject(), claim.subject});
        graph.insert({statement, terms::claim_predicate(), claim.predicate});
        graph.insert({statement, terms::claim_object(), claim.object});
      }
    }
  }

  for (const auto &param : process.parameters) {
    auto node = graph.mint_blank();
    graph.insert({self, terms::parameter().front(), node});
    graph.insert({node, terms::rdfs_label(), Literal{param.name, {}, std::nullopt}});
    if (param.min) graph.insert({node, terms::min_value(), Literal{format_number(*param.min), {}, std::nullopt}});
    if (param.max) graph.insert({node, terms::max_value(), Literal{format_number(*param.max), {}, std::nullopt}});
    for (const auto &value : param.allowed) {
      graph.insert({node, terms::allowed_value(), Literal{value, {}, std::nullopt}});
    }
  }
}

} // namespace execdesc
