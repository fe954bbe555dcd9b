#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace execdesc::rdf {

/// An absolute IRI. Relative references are resolved before an Iri is built
/// by the parser; equality is exact string comparison.
struct Iri {
  std::string value;

  friend auto operator<=>(const Iri &, const Iri &) = default;
  friend bool operator==(const Iri &, const Iri &) = default;
};

/// Blank node identity is label equality within a single Graph.
struct BlankNode {
  std::string label;

  friend auto operator<=>(const BlankNode &, const BlankNode &) = default;
  friend bool operator==(const BlankNode &, const BlankNode &) = default;
};

/// A literal carries either a language tag or a datatype, never both.
/// An empty `language` and no datatype means a plain string.
struct Literal {
  std::string lexical;
  std::string language;
  std::optional<Iri> datatype;

  friend auto operator<=>(const Literal &, const Literal &) = default;
  friend bool operator==(const Literal &, const Literal &) = default;
};

/// Subject position: IRI or blank node.
using Node = std::variant<Iri, BlankNode>;
/// Object position: any term.
using Term = std::variant<Iri, BlankNode, Literal>;

struct Triple {
  Node subject;
  Iri predicate;
  Term object;

  friend auto operator<=>(const Triple &, const Triple &) = default;
  friend bool operator==(const Triple &, const Triple &) = default;
};

// N-Triples forms: <iri>, _:label, "lexical"@lang, "lexical"^^<dt>.
std::string to_ntriples(const Iri &iri);
std::string to_ntriples(const BlankNode &node);
std::string to_ntriples(const Literal &literal);
std::string to_ntriples(const Node &node);
std::string to_ntriples(const Term &term);
std::string to_ntriples(const Triple &triple);

Term as_term(const Node &node);
std::optional<Node> as_node(const Term &term);

bool has_scheme(std::string_view reference);

/// RFC 3986 reference resolution against an absolute base.
Iri resolve_iri(const Iri &base, std::string_view reference);

/// Splits an IRI at the fragment; returns the IRI unchanged when it has none.
std::string strip_fragment(std::string_view iri);

/// Human-facing short name: the fragment, else the last non-empty path segment.
std::string short_name(const Iri &iri);

/// Converts a filesystem path (made absolute) to a file:// IRI.
Iri file_iri(const std::string &path);

/// A set of triples plus the base it was parsed against and the namespace
/// prefixes to reuse when it is written out again.
class Graph {
public:
  Graph() = default;
  explicit Graph(Iri base) : base_(std::move(base)) {}

  const Iri &base() const { return base_; }

  /// Returns false when the triple was already present.
  /// Throws std::invalid_argument for blank nodes this graph did not mint.
  bool insert(Triple triple);

  /// Mints `b<counter>` labels in call order.
  BlankNode mint_blank();
  bool owns(const BlankNode &node) const;

  void bind_namespace(std::string prefix, std::string iri);
  const std::map<std::string, std::string> &namespaces() const {
    return namespaces_;
  }

  std::size_t size() const { return triples_.size(); }
  bool empty() const { return triples_.empty(); }
  bool contains(const Triple &triple) const { return triples_.contains(triple); }
  auto begin() const { return triples_.begin(); }
  auto end() const { return triples_.end(); }

  std::vector<Triple> match(const std::optional<Node> &subject,
                            const std::optional<Iri> &predicate,
                            const std::optional<Term> &object) const;

  /// Objects of (subject, predicate, *), in match order.
  std::vector<Term> objects(const Node &subject, const Iri &predicate) const;
  bool has_type(const Node &subject, const Iri &type) const;

  /// All distinct subjects in N-Triples order.
  std::vector<Node> subjects() const;

private:
  Iri base_;
  std::set<Triple> triples_;
  std::map<std::string, std::string> namespaces_;
  std::set<std::string> minted_;
  std::size_t next_blank_ = 1;
};

/// Every triple matching all supplied positions, sorted by the N-Triples
/// form of subject, then predicate, then object.
std::vector<Triple> triples_matching(const Graph &graph,
                                     const std::optional<Node> &subject,
                                     const std::optional<Iri> &predicate,
                                     const std::optional<Term> &object);

namespace ns {
inline constexpr std::string_view rdf = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr std::string_view rdfs = "http://www.w3.org/2000/01/rdf-schema#";
inline constexpr std::string_view xml = "http://www.w3.org/XML/1998/namespace";
} // namespace ns

inline Iri rdf_type() { return Iri{std::string(ns::rdf) + "type"}; }

} // namespace execdesc::rdf
