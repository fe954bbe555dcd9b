#include "execdesc/rdf_xml.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace execdesc::rdf {

namespace {

const std::string kRdf(ns::rdf);

bool is_name_start(unsigned char c) {
  return std::isalpha(c) || c == '_' || c >= 0x80;
}
bool is_name_char(unsigned char c) {
  return is_name_start(c) || std::isdigit(c) || c == '-' || c == '.';
}
bool is_ncname(std::string_view s) {
  if (s.empty() || !is_name_start(static_cast<unsigned char>(s.front()))) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return is_name_char(static_cast<unsigned char>(c)); });
}

std::string escape(std::string_view text, bool attribute) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '\r': out += "&#13;"; break;
    case '"': out += attribute ? "&quot;" : "\""; break;
    case '\n': out += attribute ? "&#10;" : "\n"; break;
    case '\t': out += attribute ? "&#9;" : "\t"; break;
    default: out += c;
    }
  }
  return out;
}

class Writer {
public:
  explicit Writer(const Graph &graph) : graph_(graph) {
    prefixes_[""] = std::string(kDefaultVocabulary);
    prefixes_["rdf"] = kRdf;
    for (const auto &[prefix, iri] : graph.namespaces()) {
      if (prefix.empty() || prefixes_.contains(prefix) || !is_ncname(prefix) ||
          prefix.starts_with("xml")) {
        continue;
      }
      if (std::any_of(prefixes_.begin(), prefixes_.end(),
                      [&](const auto &p) { return p.second == iri; })) {
        continue;
      }
      prefixes_[prefix] = iri;
    }
  }

  std::string write() {
    plan_nesting();

    // Names are assigned while writing the body, so the root element is
    // emitted afterwards with the final prefix table.
    std::ostringstream body;
    std::set<Node> emitted;
    for (const auto &subject : roots_) write_node(body, subject, 1, emitted);

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<rdf:RDF";
    for (const auto &[prefix, iri] : prefixes_) {
      if (!used_prefixes_.contains(prefix) && prefix != "rdf") continue;
      out << "\n    " << (prefix.empty() ? std::string("xmlns") : "xmlns:" + prefix) << "=\""
          << escape(iri, true) << "\"";
    }
    if (roots_.empty()) {
      out << "/>\n";
    } else {
      out << ">\n" << body.str() << "</rdf:RDF>\n";
    }
    return out.str();
  }

private:
  // Blank nodes referenced exactly once are written inline under the
  // referencing property; every other blank node is written at top level and
  // referenced through rdf:nodeID.
  void plan_nesting() {
    std::map<BlankNode, int> references;
    for (const auto &t : graph_) {
      if (const auto *b = std::get_if<BlankNode>(&t.object)) ++references[*b];
    }
    for (const auto &[node, count] : references) {
      if (count == 1) inline_.insert(node);
    }

    std::vector<Node> candidates = graph_.subjects();
    std::set<Node> reached;
    auto visit = [&](const Node &start) {
      std::vector<Node> pending{start};
      while (!pending.empty()) {
        Node n = pending.back();
        pending.pop_back();
        if (!reached.insert(n).second) continue;
        for (const auto &t : graph_.match(n, std::nullopt, std::nullopt)) {
          if (const auto *b = std::get_if<BlankNode>(&t.object); b && inline_.contains(*b))
            pending.emplace_back(*b);
        }
      }
    };
    for (const auto &subject : candidates) {
      const auto *b = std::get_if<BlankNode>(&subject);
      if (b && inline_.contains(*b)) continue;
      roots_.push_back(subject);
      visit(subject);
    }
    // What is left are cycles of once-referenced blank nodes; break each at
    // its smallest member.
    for (const auto &subject : candidates) {
      if (reached.contains(subject)) continue;
      inline_.erase(std::get<BlankNode>(subject));
      roots_.push_back(subject);
      visit(subject);
    }
  }

  std::string qname(const Iri &iri) {
    const std::string &v = iri.value;
    std::string best_prefix;
    std::size_t best_len = 0;
    bool found = false;
    for (const auto &[prefix, ns] : prefixes_) {
      if (v.size() > ns.size() && v.starts_with(ns) && is_ncname(std::string_view(v).substr(ns.size())) &&
          (!found || ns.size() > best_len)) {
        best_prefix = prefix;
        best_len = ns.size();
        found = true;
      }
    }
    if (!found) {
      std::size_t start = v.size();
      while (start > 0 && is_name_char(static_cast<unsigned char>(v[start - 1]))) --start;
      while (start < v.size() && !is_name_start(static_cast<unsigned char>(v[start]))) ++start;
      if (start == v.size() || start == 0) {
        throw std::invalid_argument("IRI has no XML qualified-name form: " + v);
      }
      std::string ns = v.substr(0, start);
      std::string prefix;
      do {
        prefix = "ns" + std::to_string(++generated_);
      } while (prefixes_.contains(prefix));
      prefixes_[prefix] = ns;
      best_prefix = prefix;
      best_len = ns.size();
    }
    used_prefixes_.insert(best_prefix);
    auto local = v.substr(best_len);
    return best_prefix.empty() ? local : best_prefix + ":" + local;
  }

  std::string reference(const Iri &iri) const {
    const std::string &base = graph_.base().value;
    if (!base.empty() && base.find('#') == std::string::npos && iri.value.size() > base.size() &&
        iri.value.starts_with(base) && iri.value[base.size()] == '#') {
      return iri.value.substr(base.size());
    }
    return iri.value;
  }

  void write_node(std::ostringstream &out, const Node &subject, int depth, std::set<Node> &emitted) {
    emitted.insert(subject);
    std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
    auto triples = graph_.match(subject, std::nullopt, std::nullopt);

    std::optional<Iri> element_type;
    for (const auto &t : triples) {
      if (t.predicate == rdf_type()) {
        if (const auto *type = std::get_if<Iri>(&t.object)) {
          element_type = *type;
          break;
        }
      }
    }
    std::string element = element_type ? qname(*element_type) : std::string("rdf:Description");
    if (element_type && (*element_type == Iri{kRdf + "Description"} || element.starts_with("rdf:"))) {
      // Syntax names cannot double as a node element type; keep the type as a property.
      element_type.reset();
      element = "rdf:Description";
    }

    out << indent << "<" << element;
    if (const auto *iri = std::get_if<Iri>(&subject)) {
      out << " rdf:about=\"" << escape(reference(*iri), true) << "\"";
    } else if (!inline_.contains(std::get<BlankNode>(subject))) {
      out << " rdf:nodeID=\"" << std::get<BlankNode>(subject).label << "\"";
    }

    bool has_properties = false;
    std::ostringstream props;
    for (const auto &t : triples) {
      if (element_type && t.predicate == rdf_type() && t.object == Term{*element_type}) continue;
      has_properties = true;
      write_property(props, t, depth + 1, emitted);
    }
    if (!has_properties) {
      out << "/>\n";
      return;
    }
    out << ">\n" << props.str() << indent << "</" << element << ">\n";
  }

  void write_property(std::ostringstream &out, const Triple &t, int depth, std::set<Node> &emitted) {
    std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
    std::string name = qname(t.predicate);
    static const std::set<std::string> syntax = {
        "rdf:RDF", "rdf:Description", "rdf:ID", "rdf:about", "rdf:parseType", "rdf:resource",
        "rdf:nodeID", "rdf:datatype", "rdf:li", "rdf:aboutEach", "rdf:aboutEachPrefix", "rdf:bagID"};
    if (syntax.contains(name)) {
      throw std::invalid_argument(name + " cannot be written as an RDF/XML property element");
    }
    if (const auto *literal = std::get_if<Literal>(&t.object)) {
      out << indent << "<" << name;
      if (!literal->language.empty()) {
        out << " xml:lang=\"" << escape(literal->language, true) << "\"";
      } else if (literal->datatype) {
        out << " rdf:datatype=\"" << escape(literal->datatype->value, true) << "\"";
      }
      out << ">" << escape(literal->lexical, false) << "</" << name << ">\n";
    } else if (const auto *iri = std::get_if<Iri>(&t.object)) {
      out << indent << "<" << name << " rdf:resource=\"" << escape(reference(*iri), true) << "\"/>\n";
    } else {
      const auto &blank = std::get<BlankNode>(t.object);
      if (inline_.contains(blank) && !emitted.contains(Node{blank})) {
        out << indent << "<" << name << ">\n";
        write_node(out, Node{blank}, depth + 1, emitted);
        out << indent << "</" << name << ">\n";
      } else {
        out << indent << "<" << name << " rdf:nodeID=\"" << blank.label << "\"/>\n";
      }
    }
  }

  const Graph &graph_;
  std::map<std::string, std::string> prefixes_;
  std::set<std::string> used_prefixes_;
  std::set<BlankNode> inline_;
  std::vector<Node> roots_;
  int generated_ = 0;
};

} // namespace

std::string serialize_rdf_xml(const Graph &graph) { return Writer(graph).write(); }

} // namespace execdesc::rdf
