#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "execdesc/rdf.hpp"

namespace execdesc::rdf {

/// The vocabulary namespace used for element names that carry no prefix when
/// the document declares no default namespace.
inline constexpr std::string_view kDefaultVocabulary =
    "http://example.org/execution-description/1.0";

class ParseError : public std::runtime_error {
public:
  ParseError(const std::string &message, long line, long column)
      : std::runtime_error(format(message, line, column)), line_(line), column_(column) {}

  long line() const { return line_; }
  long column() const { return column_; }

private:
  static std::string format(const std::string &message, long line, long column) {
    return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
           message;
  }

  long line_;
  long column_;
};

/// Raised for valid RDF/XML this reader deliberately does not interpret
/// (rdf:parseType, reification, rdf:li, xml:base, ...).
class UnsupportedConstruct : public ParseError {
public:
  UnsupportedConstruct(std::string construct, long line, long column)
      : ParseError("unsupported construct: " + construct, line, column),
        construct_(std::move(construct)) {}

  const std::string &construct() const { return construct_; }

private:
  std::string construct_;
};

struct ParseWarning {
  long line = 0;
  long column = 0;
  std::string code;
  std::string message;
};

/// Reads the RDF/XML subset used by execution descriptions. Blank nodes are
/// labelled b1, b2, ... in document order.
Graph parse_rdf_xml(std::string_view document, const Iri &base,
                    std::vector<ParseWarning> *warnings = nullptr);

/// Writes `graph` as RDF/XML. IRIs under the graph base are written as
/// fragment references so the document can be re-read under another base.
/// Throws std::invalid_argument for a predicate that has no XML QName form.
std::string serialize_rdf_xml(const Graph &graph);

} // namespace execdesc::rdf
