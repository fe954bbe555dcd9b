#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "execdesc/purpose.hpp"
#include "execdesc/rdf.hpp"
#include "execdesc/rdf_xml.hpp"

namespace execdesc {

/// A shell command with `${name}` placeholders. `name` matches
/// [A-Za-z_][A-Za-z0-9_]*; the bare `$name` form is left alone.
struct CommandTemplate {
  std::string raw;
  std::vector<std::string> placeholders;

  static CommandTemplate from(std::string raw);
  friend bool operator==(const CommandTemplate &, const CommandTemplate &) = default;
};

/// Distinct placeholder names in first-occurrence order.
std::vector<std::string> placeholders(std::string_view command);

enum class ParameterKind { Unconstrained, NumericRange, Enumeration };

struct ParameterSpec {
  std::string name;
  ParameterKind kind = ParameterKind::Unconstrained;
  std::optional<double> min;
  std::optional<double> max;
  std::vector<std::string> allowed;

  friend bool operator==(const ParameterSpec &, const ParameterSpec &) = default;
};

struct ProcessDescriptor {
  rdf::Iri id;
  CommandTemplate command;
  std::vector<purpose::Purpose> purposes;
  std::vector<rdf::Iri> depends_on;
  std::vector<ParameterSpec> parameters;

  const ParameterSpec *parameter(std::string_view name) const;
  friend bool operator==(const ProcessDescriptor &, const ProcessDescriptor &) = default;
};

enum class Severity { Error, Warning };

/// Diagnostic codes:
///   MISSING_COMMAND        error    process node (typed or purpose-bearing) without ed:command
///   DANGLING_DEPENDENCY    error    ed:dependsOn target is not a process in this document
///   DEPENDENCY_CYCLE       error    processes depend on each other; message lists the cycle
///   INVALID_PARAMETER      error    unlabelled, duplicate, or inconsistent parameter bounds
///   MULTIPLE_COMMANDS      error    more than one ed:command on a process
///   UNDECLARED_PLACEHOLDER warning  `${name}` without a parameter declaration
///   UNKNOWN_ATTRIBUTE      warning  attribute read as a property but probably a typo (rdf:label)
///   UNRECOGNIZED_PURPOSE   warning  purpose node of an unknown shape, kept as a label
///   ANONYMOUS_PROCESS      warning  process is a blank node and cannot be referenced
struct Diagnostic {
  Severity severity = Severity::Warning;
  std::string code;
  std::optional<rdf::Iri> subject;
  std::string message;

  friend bool operator==(const Diagnostic &, const Diagnostic &) = default;
};

std::string_view to_string(Severity severity);
std::string format(const Diagnostic &diagnostic);

struct ExecutionDescription {
  rdf::Iri base;
  std::map<rdf::Iri, ProcessDescriptor> processes;
  rdf::Graph source_graph;
  /// Problems found while reading the graph; validate() reports them too.
  std::vector<Diagnostic> notes;

  const ProcessDescriptor *find(const rdf::Iri &id) const;
};

ExecutionDescription extract(const rdf::Graph &graph);

/// Parses and extracts in one step; parser warnings become UNKNOWN_ATTRIBUTE notes.
/// Throws rdf::ParseError.
ExecutionDescription load_description(std::string_view document, const rdf::Iri &base);

struct ValidationOptions {
  bool placeholders_are_errors = false;
};

/// Sorted by severity (errors first), then subject, then code.
std::vector<Diagnostic> validate(const ExecutionDescription &description,
                                 const ValidationOptions &options = {});

bool has_errors(const std::vector<Diagnostic> &diagnostics);

/// Adds the triples describing `process` to `graph` (the inverse of extract
/// for the supported purpose and parameter forms).
void add_process(rdf::Graph &graph, const ProcessDescriptor &process);

} // namespace execdesc
