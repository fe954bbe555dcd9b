#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "execdesc/rdf.hpp"
#include "execdesc/vocab.hpp"

namespace execdesc {

using Bindings = std::map<std::string, std::string>;

class PlanError : public std::runtime_error {
public:
  enum class Kind { UnknownTarget, DanglingDependency, Cycle, NoTargets };

  PlanError(Kind kind, const std::string &message, std::vector<rdf::Iri> involved = {})
      : std::runtime_error(message), kind_(kind), involved_(std::move(involved)) {}

  Kind kind() const { return kind_; }
  /// The unknown IRI, the dangling dependency, or the cycle path.
  const std::vector<rdf::Iri> &involved() const { return involved_; }

private:
  Kind kind_;
  std::vector<rdf::Iri> involved_;
};

struct PlanStep {
  rdf::Iri process;
  std::string bound_command;
  /// Dependencies of this step; all of them appear earlier in the plan.
  std::vector<rdf::Iri> depends_on;

  friend bool operator==(const PlanStep &, const PlanStep &) = default;
};

struct Plan {
  std::vector<PlanStep> steps;
  std::vector<rdf::Iri> targets;
  /// Non-fatal binding notes, e.g. a binding no step uses.
  std::vector<std::string> warnings;

  friend bool operator==(const Plan &, const Plan &) = default;
};

std::set<rdf::Iri> dependency_closure(const ExecutionDescription &description,
                                      const std::vector<rdf::Iri> &targets);

/// Kahn's algorithm; among ready nodes the lexicographically smallest IRI
/// goes first. Throws PlanError(Cycle) carrying one explicit cycle path.
std::vector<rdf::Iri> topological_order(const ExecutionDescription &description,
                                        const std::set<rdf::Iri> &nodes);

/// Closure, ordering and parameter binding. With `strict`, a binding that no
/// step uses is an error instead of a warning.
Plan build_plan(const ExecutionDescription &description, const std::vector<rdf::Iri> &targets,
                const Bindings &bindings, bool strict = false);

} // namespace execdesc
