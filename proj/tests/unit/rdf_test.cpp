#include <doctest.h>

#include <stdexcept>

#include "execdesc/rdf.hpp"

using namespace execdesc::rdf;

TEST_CASE("resolve_iri follows RFC 3986 reference resolution") {
  // Normal examples from RFC 3986 section 5.4.1.
  const Iri base{"http://a/b/c/d;p?q"};
  const std::vector<std::pair<std::string, std::string>> cases{
      {"g:h", "g:h"},
      {"g", "http://a/b/c/g"},
      {"./g", "http://a/b/c/g"},
      {"g/", "http://a/b/c/g/"},
      {"/g", "http://a/g"},
      {"//g", "http://g"},
      {"?y", "http://a/b/c/d;p?y"},
      {"g?y", "http://a/b/c/g?y"},
      {"#s", "http://a/b/c/d;p?q#s"},
      {"g#s", "http://a/b/c/g#s"},
      {";x", "http://a/b/c/;x"},
      {"", "http://a/b/c/d;p?q"},
      {".", "http://a/b/c/"},
      {"..", "http://a/b/"},
      {"../g", "http://a/b/g"},
      {"../..", "http://a/"},
      {"../../g", "http://a/g"},
      {"../../../g", "http://a/g"},
      {"/./g", "http://a/g"},
      {"g.", "http://a/b/c/g."},
      {"./../g", "http://a/b/g"},
      {"g;x=1/../y", "http://a/b/c/y"},
  };
  for (const auto &[reference, expected] : cases) {
    CAPTURE(reference);
    CHECK(resolve_iri(base, reference).value == expected);
  }
}

TEST_CASE("fragment references resolve against the document base") {
  const Iri base{"file:///w/execution-description.rdf"};
  CHECK(resolve_iri(base, "#make-data").value == "file:///w/execution-description.rdf#make-data");
  CHECK(resolve_iri(base, "links-to-pub").value == "file:///w/links-to-pub");
  CHECK(resolve_iri(Iri{"file:///w/x.rdf#old"}, "#new").value == "file:///w/x.rdf#new");
}

TEST_CASE("strip_fragment and short_name") {
  CHECK(strip_fragment("https://example.com/article24#claim31") == "https://example.com/article24");
  CHECK(strip_fragment("https://doi.org/10.1234/123456789") == "https://doi.org/10.1234/123456789");
  CHECK(short_name(Iri{"file:///w/d.rdf#plot-figures"}) == "plot-figures");
  CHECK(short_name(Iri{"file:///w/links-to-fig"}) == "links-to-fig");
  CHECK(short_name(Iri{"http://example.org/dir/"}) == "dir");
}

TEST_CASE("file_iri percent-encodes and absolutizes") {
  CHECK(file_iri("/tmp/a b/c.rdf").value == "file:///tmp/a%20b/c.rdf");
  CHECK(file_iri("/tmp/x#y").value == "file:///tmp/x%23y");
  CHECK(has_scheme(file_iri("relative.rdf").value));
}

TEST_CASE("N-Triples forms escape specials") {
  CHECK(to_ntriples(Iri{"http://x/y"}) == "<http://x/y>");
  CHECK(to_ntriples(BlankNode{"b1"}) == "_:b1");
  CHECK(to_ntriples(Literal{"plot figures", "en", std::nullopt}) == "\"plot figures\"@en");
  CHECK(to_ntriples(Literal{"a\"b\\c\nd", "", std::nullopt}) == "\"a\\\"b\\\\c\\nd\"");
  CHECK(to_ntriples(Literal{"3", "", Iri{"http://www.w3.org/2001/XMLSchema#integer"}}) ==
        "\"3\"^^<http://www.w3.org/2001/XMLSchema#integer>");
}

TEST_CASE("Graph has set semantics and only accepts its own blank nodes") {
  Graph g(Iri{"urn:base"});
  Triple t{Iri{"urn:s"}, Iri{"urn:p"}, Literal{"o", "", std::nullopt}};
  CHECK(g.insert(t));
  CHECK_FALSE(g.insert(t));
  CHECK(g.size() == 1);

  auto b = g.mint_blank();
  CHECK(b.label == "b1");
  CHECK(g.mint_blank().label == "b2");
  CHECK(g.insert({b, Iri{"urn:p"}, Iri{"urn:o"}}));
  CHECK_THROWS_AS(g.insert({BlankNode{"b99"}, Iri{"urn:p"}, Iri{"urn:o"}}), std::invalid_argument);

  Graph other;
  CHECK_THROWS_AS(other.insert({Iri{"urn:s"}, Iri{"urn:p"}, b}), std::invalid_argument);
}

TEST_CASE("triples_matching filters by position and sorts by N-Triples form") {
  Graph g(Iri{"urn:base"});
  const Iri p{"urn:p"}, q{"urn:q"};
  g.insert({Iri{"urn:s2"}, p, Literal{"b", "", std::nullopt}});
  g.insert({Iri{"urn:s1"}, q, Iri{"urn:o"}});
  g.insert({Iri{"urn:s1"}, p, Literal{"a", "", std::nullopt}});
  g.insert({Iri{"urn:s1"}, p, Iri{"urn:o"}});

  auto all = triples_matching(g, std::nullopt, std::nullopt, std::nullopt);
  REQUIRE(all.size() == 4);
  for (std::size_t i = 1; i < all.size(); ++i) {
    auto key = [](const Triple &t) {
      return std::make_tuple(to_ntriples(t.subject), to_ntriples(t.predicate), to_ntriples(t.object));
    };
    CHECK(key(all[i - 1]) < key(all[i]));
  }
  CHECK(triples_matching(g, Node{Iri{"urn:s1"}}, p, std::nullopt).size() == 2);
  CHECK(triples_matching(g, std::nullopt, q, std::nullopt).size() == 1);
  CHECK(triples_matching(g, std::nullopt, std::nullopt, Term{Iri{"urn:o"}}).size() == 2);
  CHECK(triples_matching(Graph{}, std::nullopt, p, std::nullopt).empty());
}
