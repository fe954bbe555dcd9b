#include <doctest.h>

#include <random>

#include "execdesc/purpose.hpp"
#include "execdesc/rdf_xml.hpp"
#include "execdesc/vocab.hpp"
#include "support/test_support.hpp"

using namespace execdesc;
using namespace execdesc::purpose;
using rdf::Iri;
using namespace testsupport;

namespace {

const Iri kBase{"file:///w/execution-description.rdf"};
const Iri kDoi{"https://doi.org/10.1234/123456789"};
Iri at(const std::string &fragment) { return Iri{kBase.value + "#" + fragment}; }

const InlineClaim kMalaria{Iri{"https://www.wikidata.org/entity/Q12156"}, Iri{"http://www.wikidata.org/prop/P1060"},
                           Iri{"https://www.wikidata.org/entity/Q15304532"}};

ExecutionDescription fixture() { return load_description(fixture_text(), kBase); }

} // namespace

TEST_CASE("fixture purposes") {
  auto d = fixture();
  CHECK(d.find(Iri{"file:///w/links-to-fig"})->purposes ==
        std::vector<Purpose>{GeneratesFigure{"Figure 2b", kDoi}});
  CHECK(d.find(Iri{"file:///w/links-to-pub"})->purposes == std::vector<Purpose>{EvidenceFor{kDoi}});
  CHECK(d.find(at("make"))->purposes == std::vector<Purpose>{Label{"compiles libraries", "en"}});

  const auto &nanopub = d.find(Iri{"file:///w/defines-nanopub"})->purposes;
  CHECK(std::find(nanopub.begin(), nanopub.end(), Purpose{SupportsClaim{kMalaria}}) != nanopub.end());
  CHECK(std::find(nanopub.begin(), nanopub.end(),
                  Purpose{SupportsClaim{RemoteClaim{Iri{"https://example.com/article24#claim31"}}}}) != nanopub.end());
}

TEST_CASE("matches") {
  CHECK(matches(EvidenceFor{kDoi}, ByDocument{kDoi}));
  CHECK_FALSE(matches(Label{"compiles libraries", "en"}, ByDocument{kDoi}));
  CHECK_FALSE(matches(GeneratesFigure{"Figure 2b", kDoi}, ByFigure{kDoi, "Figure 2B"}));
  CHECK(matches(GeneratesFigure{"Figure 2b", kDoi}, ByFigure{kDoi, "Figure 2b"}));
  CHECK(matches(GeneratesFigure{"Figure 2b", kDoi}, ByFigure{kDoi, std::nullopt}));
  CHECK(matches(GeneratesFigure{"Figure 2b", kDoi}, ByDocument{kDoi}));
  CHECK_FALSE(matches(GeneratesFigure{"Figure 2b", std::nullopt}, ByDocument{kDoi}));

  CHECK(matches(SupportsClaim{RemoteClaim{Iri{"https://example.com/article24#claim31"}}},
                ByDocument{Iri{"https://example.com/article24"}}));
  CHECK_FALSE(matches(SupportsClaim{RemoteClaim{Iri{"https://example.com/article24#claim31"}}},
                      ByDocument{Iri{"https://example.com/article2"}}));
  CHECK(matches(SupportsClaim{kMalaria}, ByClaim{kMalaria}));
  CHECK_FALSE(matches(SupportsClaim{kMalaria}, ByClaim{RemoteClaim{kMalaria.subject}}));

  // No DOI normalization.
  CHECK_FALSE(matches(EvidenceFor{kDoi}, ByDocument{Iri{"http://dx.doi.org/10.1234/123456789"}}));
}

TEST_CASE("label matching: exact is case-sensitive, substring is not") {
  const Label label{"Compiles Libraries", "en"};
  CHECK(matches(label, ByLabel{"Compiles Libraries", LabelMatch::Exact}));
  CHECK_FALSE(matches(label, ByLabel{"compiles libraries", LabelMatch::Exact}));
  CHECK(matches(label, ByLabel{"LIBRAR", LabelMatch::Substring}));
  CHECK(matches(label, ByLabel{"", LabelMatch::Substring}));
  CHECK_FALSE(matches(label, ByLabel{"figures", LabelMatch::Substring}));
}

TEST_CASE("select_processes on the fixture") {
  auto d = fixture();
  CHECK(select_processes(d, ByDocument{kDoi}) ==
        std::vector<Iri>{Iri{"file:///w/links-to-fig"}, Iri{"file:///w/links-to-pub"}});
  CHECK(select_processes(d, ByLabel{"compiles libraries", LabelMatch::Exact}) == std::vector<Iri>{at("make")});
  CHECK(select_processes(d, ByClaim{kMalaria}) == std::vector<Iri>{Iri{"file:///w/defines-nanopub"}});
  CHECK(select_processes(d, ByFigure{kDoi, "Figure 2b"}) == std::vector<Iri>{Iri{"file:///w/links-to-fig"}});
  CHECK(select_processes(ExecutionDescription{}, ByDocument{kDoi}).empty());
}

TEST_CASE("property: select_processes is sound, complete, sorted and unique") {
  std::mt19937 rng(5);
  const std::vector<PurposeQuery> queries{
      ByDocument{kDoi},
      ByDocument{Iri{"https://example.com/paper"}},
      ByDocument{Iri{"https://example.com/a"}},
      ByFigure{kDoi, std::nullopt},
      ByFigure{kDoi, "Figure 2b"},
      ByLabel{"run", LabelMatch::Substring},
      ByLabel{"data", LabelMatch::Exact},
      ByClaim{RemoteClaim{Iri{"https://example.com/a#c1"}}},
  };
  for (int i = 0; i < 100; ++i) {
    auto d = extract(random_description_graph(rng, kBase));
    for (const auto &q : queries) {
      auto selected = select_processes(d, q);
      CHECK(std::is_sorted(selected.begin(), selected.end()));
      CHECK(std::adjacent_find(selected.begin(), selected.end()) == selected.end());
      std::vector<Iri> expected;
      for (const auto &[id, p] : d.processes) {
        if (std::any_of(p.purposes.begin(), p.purposes.end(), [&](const Purpose &x) { return matches(x, q); })) {
          expected.push_back(id);
        }
      }
      CHECK(selected == expected);
    }
  }
}

TEST_CASE("unknown purpose shapes degrade to a flagged label") {
  auto description = load_description(
      R"(<rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#" xmlns:ex="http://ex.org/">
        <process rdf:about="#p"><command>x</command>
          <purpose><rdf:Description ex:odd="1"/></purpose>
          <purpose rdf:resource="http://ex.org/thing"/>
        </process></rdf:RDF>)",
      kBase);
  const auto &p = *description.find(at("p"));
  CHECK(p.purposes.size() == 2);
  for (const auto &x : p.purposes) CHECK(std::holds_alternative<Label>(x));
  auto warnings = std::count_if(description.notes.begin(), description.notes.end(),
                                [](const Diagnostic &d) { return d.code == "UNRECOGNIZED_PURPOSE"; });
  CHECK(warnings == 2);
}

TEST_CASE("canonical vocabulary spellings are read too") {
  auto description = load_description(
      R"(<rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#"
                  xmlns:cito="http://purl.org/spar/cito/">
        <process rdf:about="#p"><command>x</command>
          <purpose><rdf:Description><cito:isCitedAsEvidenceBy rdf:resource="https://doi.org/10.1/x"/></rdf:Description></purpose>
        </process></rdf:RDF>)",
      kBase);
  CHECK(description.find(at("p"))->purposes == std::vector<Purpose>{EvidenceFor{Iri{"https://doi.org/10.1/x"}}});
}

TEST_CASE("summaries") {
  CHECK(summarize(Label{"plot figures", "en"}) == "\"plot figures\"");
  CHECK(summarize(EvidenceFor{kDoi}).find(kDoi.value) != std::string::npos);
  CHECK(summarize(GeneratesFigure{"Figure 2b", kDoi}).find("Figure 2b") != std::string::npos);
}
