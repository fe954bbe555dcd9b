#include "execdesc/purpose.hpp"

#include <algorithm>
#include <cctype>

#include "execdesc/terms.hpp"
#include "execdesc/vocab.hpp"

namespace execdesc::purpose {

namespace {

using rdf::Graph;
using rdf::Iri;
using rdf::Node;
using rdf::Term;

std::vector<Term> objects_any(const Graph &graph, const Node &subject,
                              const terms::Spellings &predicates) {
  std::vector<Term> out;
  for (const auto &p : predicates) {
    auto found = graph.objects(subject, p);
    out.insert(out.end(), found.begin(), found.end());
  }
  return out;
}

bool has_type_any(const Graph &graph, const Node &subject, const terms::Spellings &types) {
  return std::any_of(types.begin(), types.end(),
                     [&](const Iri &t) { return graph.has_type(subject, t); });
}

std::optional<Iri> first_iri(const std::vector<Term> &terms) {
  for (const auto &t : terms) {
    if (const auto *iri = std::get_if<Iri>(&t)) return *iri;
  }
  return std::nullopt;
}

std::optional<InlineClaim> read_statement(const Graph &graph, const Node &statement) {
  auto s = first_iri(graph.objects(statement, terms::claim_subject()));
  auto p = first_iri(graph.objects(statement, terms::claim_predicate()));
  auto o = first_iri(graph.objects(statement, terms::claim_object()));
  if (!s || !p || !o) return std::nullopt;
  return InlineClaim{*s, *p, *o};
}

// Statement nodes hang off a supports node either as the object of
// wikibase:Statement or as the node itself typed wikibase:Statement.
void read_statements(const Graph &graph, const Node &holder, std::vector<Purpose> &out) {
  for (const auto &term : objects_any(graph, holder, terms::statement())) {
    if (auto node = rdf::as_node(term)) {
      if (auto claim = read_statement(graph, *node)) out.push_back(SupportsClaim{*claim});
    }
  }
  if (has_type_any(graph, holder, terms::statement())) {
    if (auto claim = read_statement(graph, holder)) out.push_back(SupportsClaim{*claim});
  }
}

void read_supports(const Graph &graph, const Node &holder, std::vector<Purpose> &out) {
  for (const auto &term : objects_any(graph, holder, terms::supports())) {
    auto node = rdf::as_node(term);
    if (!node) continue;
    std::vector<Purpose> inline_claims;
    read_statements(graph, *node, inline_claims);
    if (!inline_claims.empty()) {
      out.insert(out.end(), inline_claims.begin(), inline_claims.end());
    } else if (const auto *iri = std::get_if<Iri>(&term)) {
      out.push_back(SupportsClaim{RemoteClaim{*iri}});
    }
  }
}

void read_figures(const Graph &graph, const Node &generated, std::vector<Purpose> &out) {
  for (const auto &term : objects_any(graph, generated, terms::figure())) {
    auto figure = rdf::as_node(term);
    if (!figure) continue;
    GeneratesFigure purpose;
    for (const auto &t : objects_any(graph, *figure, terms::title())) {
      if (const auto *lit = std::get_if<rdf::Literal>(&t)) {
        purpose.title = lit->lexical;
        break;
      }
    }
    purpose.part_of = first_iri(objects_any(graph, *figure, terms::is_part_of()));
    out.push_back(std::move(purpose));
  }
}

std::vector<Purpose> read_purpose_node(const Graph &graph, const Node &node) {
  std::vector<Purpose> out;
  for (const auto &term : objects_any(graph, node, terms::cited_as_evidence_by())) {
    if (const auto *doc = std::get_if<Iri>(&term)) out.push_back(EvidenceFor{*doc});
  }
  if (has_type_any(graph, node, terms::generated())) read_figures(graph, node, out);
  for (const auto &term : objects_any(graph, node, terms::generated())) {
    if (auto generated = rdf::as_node(term)) read_figures(graph, *generated, out);
  }
  if (has_type_any(graph, node, terms::supports())) read_statements(graph, node, out);
  read_supports(graph, node, out);
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

} // namespace

std::vector<Purpose> extract_purposes(const Graph &graph, const Node &process,
                                      std::vector<Diagnostic> *notes) {
  std::vector<Purpose> out;
  for (const auto &term : graph.objects(process, terms::purpose())) {
    if (const auto *literal = std::get_if<rdf::Literal>(&term)) {
      out.push_back(Label{literal->lexical, literal->language});
      continue;
    }
    auto found = read_purpose_node(graph, *rdf::as_node(term));
    if (found.empty()) {
      auto form = rdf::to_ntriples(term);
      out.push_back(Label{form, {}});
      if (notes) {
        std::optional<Iri> subject;
        if (const auto *iri = std::get_if<Iri>(&process)) subject = *iri;
        notes->push_back({Severity::Warning, "UNRECOGNIZED_PURPOSE", subject,
                          "purpose node " + form + " has no recognized shape; kept as a label"});
      }
      continue;
    }
    out.insert(out.end(), found.begin(), found.end());
  }
  read_supports(graph, process, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool matches(const Purpose &purpose, const PurposeQuery &query) {
  if (const auto *q = std::get_if<ByLabel>(&query)) {
    const auto *label = std::get_if<Label>(&purpose);
    if (!label) return false;
    if (q->mode == LabelMatch::Exact) return label->text == q->text;
    return lower(label->text).find(lower(q->text)) != std::string::npos;
  }
  if (const auto *q = std::get_if<ByDocument>(&query)) {
    if (const auto *e = std::get_if<EvidenceFor>(&purpose)) return e->document == q->document;
    if (const auto *f = std::get_if<GeneratesFigure>(&purpose)) return f->part_of == q->document;
    if (const auto *s = std::get_if<SupportsClaim>(&purpose)) {
      if (const auto *remote = std::get_if<RemoteClaim>(&s->target)) {
        return rdf::strip_fragment(remote->claim.value) == q->document.value;
      }
    }
    return false;
  }
  if (const auto *q = std::get_if<ByFigure>(&query)) {
    const auto *f = std::get_if<GeneratesFigure>(&purpose);
    if (!f || f->part_of != q->document) return false;
    return !q->title || f->title == q->title;
  }
  const auto &q = std::get<ByClaim>(query);
  const auto *s = std::get_if<SupportsClaim>(&purpose);
  return s && s->target == q.claim;
}

std::vector<Iri> select_processes(const ExecutionDescription &description,
                                  const PurposeQuery &query) {
  std::vector<Iri> out;
  for (const auto &[id, process] : description.processes) {
    if (std::any_of(process.purposes.begin(), process.purposes.end(),
                    [&](const Purpose &p) { return matches(p, query); })) {
      out.push_back(id);
    }
  }
  return out;
}

std::string summarize(const Purpose &purpose) {
  if (const auto *l = std::get_if<Label>(&purpose)) return "\"" + l->text + "\"";
  if (const auto *e = std::get_if<EvidenceFor>(&purpose)) return "evidence for " + e->document.value;
  if (const auto *f = std::get_if<GeneratesFigure>(&purpose)) {
    std::string out = "figure";
    if (f->title) out += " \"" + *f->title + "\"";
    if (f->part_of) out += " of " + f->part_of->value;
    return out;
  }
  const auto &s = std::get<SupportsClaim>(purpose);
  if (const auto *r = std::get_if<RemoteClaim>(&s.target)) return "supports " + r->claim.value;
  const auto &c = std::get<InlineClaim>(s.target);
  return "supports (" + rdf::short_name(c.subject) + " " + rdf::short_name(c.predicate) + " " +
         rdf::short_name(c.object) + ")";
}

} // namespace execdesc::purpose
