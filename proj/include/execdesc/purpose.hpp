#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "execdesc/rdf.hpp"

namespace execdesc {

struct Diagnostic;
struct ExecutionDescription;

namespace purpose {

/// A claim given by IRI, or spelled out as a subject/predicate/object statement.
struct RemoteClaim {
  rdf::Iri claim;
  friend auto operator<=>(const RemoteClaim &, const RemoteClaim &) = default;
};
struct InlineClaim {
  rdf::Iri subject;
  rdf::Iri predicate;
  rdf::Iri object;
  friend auto operator<=>(const InlineClaim &, const InlineClaim &) = default;
};
using ClaimRef = std::variant<RemoteClaim, InlineClaim>;

struct Label {
  std::string text;
  std::string language;
  friend auto operator<=>(const Label &, const Label &) = default;
};
struct EvidenceFor {
  rdf::Iri document;
  friend auto operator<=>(const EvidenceFor &, const EvidenceFor &) = default;
};
struct GeneratesFigure {
  std::optional<std::string> title;
  std::optional<rdf::Iri> part_of;
  friend auto operator<=>(const GeneratesFigure &, const GeneratesFigure &) = default;
};
struct SupportsClaim {
  ClaimRef target;
  friend auto operator<=>(const SupportsClaim &, const SupportsClaim &) = default;
};

using Purpose = std::variant<Label, EvidenceFor, GeneratesFigure, SupportsClaim>;

enum class LabelMatch { Exact, Substring };

struct ByLabel {
  std::string text;
  LabelMatch mode = LabelMatch::Exact;
};
struct ByDocument {
  rdf::Iri document;
};
struct ByFigure {
  rdf::Iri document;
  std::optional<std::string> title;
};
struct ByClaim {
  ClaimRef claim;
};

/// Exact label matching is case-sensitive; substring matching ignores ASCII case.
using PurposeQuery = std::variant<ByLabel, ByDocument, ByFigure, ByClaim>;

/// Reads every purpose attached to `process` through ed:purpose, plus
/// cito:supports links made directly on the process. Result is sorted.
/// Purpose nodes of an unknown shape come back as a Label holding the node's
/// N-Triples form, and a UNRECOGNIZED_PURPOSE warning is appended to `notes`.
std::vector<Purpose> extract_purposes(const rdf::Graph &graph, const rdf::Node &process,
                                      std::vector<Diagnostic> *notes = nullptr);

bool matches(const Purpose &purpose, const PurposeQuery &query);

/// IRIs of processes owning at least one matching purpose, sorted.
std::vector<rdf::Iri> select_processes(const ExecutionDescription &description,
                                       const PurposeQuery &query);

/// One-line human summary, e.g. `figure "Figure 2b" of https://doi.org/...`.
std::string summarize(const Purpose &purpose);

} // namespace purpose
} // namespace execdesc
