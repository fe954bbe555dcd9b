#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "execdesc/rdf.hpp"
#include "execdesc/rdf_xml.hpp"

// IRIs of the execution-description vocabulary and of the external terms it
// reuses. The first spelling of each external term is the one written by
// this toolchain; the others are accepted when reading.
namespace execdesc::terms {

inline rdf::Iri ed(std::string_view local) {
  return rdf::Iri{std::string(rdf::kDefaultVocabulary) + std::string(local)};
}

inline rdf::Iri process() { return ed("process"); }
inline rdf::Iri command() { return ed("command"); }
inline rdf::Iri purpose() { return ed("purpose"); }
inline rdf::Iri depends_on() { return ed("dependsOn"); }
inline rdf::Iri claim_subject() { return ed("subject"); }
inline rdf::Iri claim_predicate() { return ed("predicate"); }
inline rdf::Iri claim_object() { return ed("object"); }
inline rdf::Iri min_value() { return ed("minValue"); }
inline rdf::Iri max_value() { return ed("maxValue"); }
inline rdf::Iri allowed_value() { return ed("allowedValue"); }

inline rdf::Iri rdfs_label() { return rdf::Iri{std::string(rdf::ns::rdfs) + "label"}; }

namespace prefix {
inline constexpr std::string_view dc = "http://purl.org/dc/elements/1.1/";
inline constexpr std::string_view wikibase = "http://wikiba.se/ontology#";
inline constexpr std::string_view cito = "http://purl.org/spar/cito";
inline constexpr std::string_view doco = "http://purl.org/spar/doco/2015-07-03";
inline constexpr std::string_view prov = "http://www.w3.org/TR/2013/PR-prov-o-20130312/";
inline constexpr std::string_view wfdesc = "http://purl.org/wf4ever/wfdesc#";
} // namespace prefix

using Spellings = std::vector<rdf::Iri>;

inline Spellings cited_as_evidence_by() {
  return {rdf::Iri{"http://purl.org/spar/citoisCitedAsEvidenceBy"},
          rdf::Iri{"http://purl.org/spar/cito/isCitedAsEvidenceBy"}};
}
inline Spellings supports() {
  return {rdf::Iri{"http://purl.org/spar/citosupports"},
          rdf::Iri{"http://purl.org/spar/cito/supports"}};
}
inline Spellings generated() {
  return {rdf::Iri{"http://www.w3.org/TR/2013/PR-prov-o-20130312/generated"},
          rdf::Iri{"http://www.w3.org/ns/prov#generated"}};
}
inline Spellings figure() {
  return {rdf::Iri{"http://purl.org/spar/doco/2015-07-03figure"},
          rdf::Iri{"http://purl.org/spar/doco/figure"}};
}
inline Spellings statement() { return {rdf::Iri{"http://wikiba.se/ontology#Statement"}}; }
inline Spellings title() {
  return {rdf::Iri{"http://purl.org/dc/elements/1.1/title"},
          rdf::Iri{"http://purl.org/dc/terms/title"}};
}
inline Spellings is_part_of() {
  return {rdf::Iri{"http://purl.org/dc/elements/1.1/isPartOf"},
          rdf::Iri{"http://purl.org/dc/terms/isPartOf"}};
}
inline Spellings parameter() { return {rdf::Iri{"http://purl.org/wf4ever/wfdesc#Parameter"}}; }

/// Binds the prefixes this toolchain writes into a freshly built graph.
inline void bind_standard_prefixes(rdf::Graph &graph) {
  graph.bind_namespace("rdfs", std::string(rdf::ns::rdfs));
  graph.bind_namespace("dc", std::string(prefix::dc));
  graph.bind_namespace("wikibase", std::string(prefix::wikibase));
  graph.bind_namespace("cito", std::string(prefix::cito));
  graph.bind_namespace("doco", std::string(prefix::doco));
  graph.bind_namespace("prov", std::string(prefix::prov));
  graph.bind_namespace("wfdesc", std::string(prefix::wfdesc));
}

} // namespace execdesc::terms
