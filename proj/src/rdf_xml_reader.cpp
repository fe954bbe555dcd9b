#include "execdesc/rdf_xml.hpp"

#include <expat.h>

#include <algorithm>
#include <map>
#include <memory>
#include <optional>

namespace execdesc::rdf {

namespace {

const std::string kRdf(ns::rdf);

bool is_blank_text(std::string_view text) {
  return std::all_of(text.begin(), text.end(),
                     [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; });
}

enum class FrameKind { Document, RdfRoot, Node, Property };

struct Frame {
  FrameKind kind = FrameKind::Document;
  std::shared_ptr<const std::map<std::string, std::string>> namespaces;
  std::string language;

  // Node frames: the node described. Property frames: the owning subject.
  std::optional<Node> subject;

  // Property frames only.
  Iri predicate;
  std::optional<Iri> datatype;
  std::optional<Term> fixed_object;
  std::string text;
  bool has_child = false;
  long line = 0;
  long column = 0;
};

struct Attribute {
  std::string qname;
  std::string iri; // resolved name; empty for xml:* and xmlns*
  std::string value;
};

class Reader {
public:
  Reader(const Iri &base, std::vector<ParseWarning> *warnings)
      : graph_(base), base_(base), warnings_(warnings) {}

  Graph run(std::string_view document) {
    XML_Parser parser = XML_ParserCreate("UTF-8");
    if (!parser) throw std::bad_alloc();
    std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)> guard(
        parser, &XML_ParserFree);
    parser_ = parser;
    XML_SetUserData(parser, this);
    XML_SetElementHandler(parser, &Reader::on_start, &Reader::on_end);
    XML_SetCharacterDataHandler(parser, &Reader::on_text);

    Frame document_frame;
    document_frame.namespaces = std::make_shared<const std::map<std::string, std::string>>();
    stack_.push_back(std::move(document_frame));

    auto status = XML_Parse(parser, document.data(), static_cast<int>(document.size()), 1);
    if (failure_) std::rethrow_exception(failure_);
    if (status != XML_STATUS_OK) {
      throw ParseError(XML_ErrorString(XML_GetErrorCode(parser)),
                       static_cast<long>(XML_GetCurrentLineNumber(parser)),
                       static_cast<long>(XML_GetCurrentColumnNumber(parser)) + 1);
    }
    for (const auto &[prefix, iri] : namespaces_seen_) graph_.bind_namespace(prefix, iri);
    return std::move(graph_);
  }

private:
  static void on_start(void *self, const XML_Char *name, const XML_Char **attrs) {
    static_cast<Reader *>(self)->guarded([&](Reader &r) { r.start_element(name, attrs); });
  }
  static void on_end(void *self, const XML_Char *name) {
    static_cast<Reader *>(self)->guarded([&](Reader &r) { r.end_element(name); });
  }
  static void on_text(void *self, const XML_Char *text, int len) {
    static_cast<Reader *>(self)->guarded(
        [&](Reader &r) { r.character_data(std::string_view(text, static_cast<size_t>(len))); });
  }

  // Exceptions must not unwind through expat's C frames.
  template <typename F> void guarded(F &&body) {
    if (failure_) return;
    try {
      body(*this);
    } catch (...) {
      failure_ = std::current_exception();
      XML_StopParser(parser_, XML_FALSE);
    }
  }

  long line() const { return static_cast<long>(XML_GetCurrentLineNumber(parser_)); }
  long column() const { return static_cast<long>(XML_GetCurrentColumnNumber(parser_)) + 1; }

  [[noreturn]] void fail(const std::string &message) const {
    throw ParseError(message, line(), column());
  }
  [[noreturn]] void unsupported(const std::string &construct) const {
    throw UnsupportedConstruct(construct, line(), column());
  }

  void warn(std::string code, std::string message) {
    if (warnings_) warnings_->push_back({line(), column(), std::move(code), std::move(message)});
  }

  std::string expand(const std::map<std::string, std::string> &scope, std::string_view qname,
                     bool is_element) const {
    auto colon = qname.find(':');
    if (colon == std::string_view::npos) {
      if (!is_element) return {};
      if (auto it = scope.find(""); it != scope.end()) return it->second + std::string(qname);
      return std::string(kDefaultVocabulary) + std::string(qname);
    }
    std::string prefix(qname.substr(0, colon));
    auto it = scope.find(prefix);
    if (it == scope.end()) fail("undeclared namespace prefix '" + prefix + "'");
    return it->second + std::string(qname.substr(colon + 1));
  }

  void start_element(std::string_view qname, const XML_Char **raw_attrs) {
    Frame &parent = stack_.back();
    Frame frame;
    frame.language = parent.language;
    frame.line = line();
    frame.column = column();

    std::vector<std::pair<std::string, std::string>> pairs;
    for (auto **a = raw_attrs; *a; a += 2) pairs.emplace_back(a[0], a[1]);

    auto scope = parent.namespaces;
    std::map<std::string, std::string> declared;
    for (const auto &[name, value] : pairs) {
      if (name == "xmlns") {
        declared[""] = value;
      } else if (name.starts_with("xmlns:")) {
        declared[name.substr(6)] = value;
      }
    }
    if (!declared.empty()) {
      auto merged = std::make_shared<std::map<std::string, std::string>>(*scope);
      for (const auto &[prefix, iri] : declared) {
        (*merged)[prefix] = iri;
        if (!prefix.empty()) namespaces_seen_.try_emplace(prefix, iri);
      }
      scope = std::move(merged);
    }
    frame.namespaces = scope;

    std::vector<Attribute> attrs;
    for (const auto &[name, value] : pairs) {
      if (name == "xmlns" || name.starts_with("xmlns:")) continue;
      if (name == "xml:lang") {
        frame.language = value;
        continue;
      }
      if (name.starts_with("xml:")) unsupported(name);
      if (name.find(':') == std::string::npos) unsupported("unqualified attribute '" + name + "'");
      attrs.push_back({name, expand(*scope, name, false), value});
    }

    std::string element = expand(*scope, qname, true);

    switch (parent.kind) {
    case FrameKind::Document:
      if (element == kRdf + "RDF") {
        for (const auto &attr : attrs) {
          if (attr.iri.starts_with(kRdf)) unsupported(attr.qname + " on rdf:RDF");
        }
        frame.kind = FrameKind::RdfRoot;
        stack_.push_back(std::move(frame));
        return;
      }
      start_node(std::move(frame), element, attrs);
      return;
    case FrameKind::RdfRoot:
      start_node(std::move(frame), element, attrs);
      return;
    case FrameKind::Node:
      start_property(std::move(frame), element, attrs);
      return;
    case FrameKind::Property:
      if (parent.has_child) fail("property element holds more than one node element");
      if (parent.fixed_object) fail("property element with rdf:resource, rdf:nodeID or property attributes must be empty");
      if (!is_blank_text(parent.text)) fail("mixed text and element content in a property element");
      parent.has_child = true;
      start_node(std::move(frame), element, attrs);
      return;
    }
  }

  BlankNode node_id(const std::string &id) {
    auto [it, inserted] = node_ids_.try_emplace(id);
    if (inserted) it->second = graph_.mint_blank();
    return it->second;
  }

  void start_node(Frame frame, const std::string &element, const std::vector<Attribute> &attrs) {
    static const std::vector<std::string> forbidden = {
        "RDF", "ID", "about", "parseType", "resource", "nodeID", "datatype", "li",
        "aboutEach", "aboutEachPrefix", "bagID"};
    for (const auto &term : forbidden) {
      if (element == kRdf + term) {
        if (term == "li") unsupported("rdf:li");
        fail("rdf:" + term + " cannot be used as a node element");
      }
    }

    std::optional<Node> subject;
    auto set_subject = [&](Node node, const std::string &attr) {
      if (subject) fail("node element has more than one of rdf:about, rdf:ID, rdf:nodeID (" + attr + ")");
      subject = std::move(node);
    };
    std::vector<const Attribute *> properties;
    for (const auto &attr : attrs) {
      if (attr.iri == kRdf + "about") {
        set_subject(resolve_iri(base_, attr.value), attr.qname);
      } else if (attr.iri == kRdf + "ID") {
        set_subject(resolve_iri(base_, "#" + attr.value), attr.qname);
      } else if (attr.iri == kRdf + "nodeID") {
        set_subject(node_id(attr.value), attr.qname);
      } else if (attr.iri == kRdf + "label") {
        warn("UNKNOWN_ATTRIBUTE", "rdf:label is not an RDF/XML syntax attribute; read as a "
                                  "property (did you mean rdf:about or rdfs:label?)");
        properties.push_back(&attr);
      } else if (attr.iri == kRdf + "type") {
        properties.push_back(&attr);
      } else if (attr.iri == kRdf + "parseType" || attr.iri == kRdf + "bagID" ||
                 attr.iri == kRdf + "aboutEach" || attr.iri == kRdf + "aboutEachPrefix" ||
                 attr.iri == kRdf + "resource" || attr.iri == kRdf + "datatype" ||
                 attr.iri == kRdf + "li") {
        unsupported(attr.qname + " on a node element");
      } else {
        properties.push_back(&attr);
      }
    }
    if (!subject) subject = graph_.mint_blank();

    if (element != kRdf + "Description") {
      graph_.insert({*subject, rdf_type(), Iri{element}});
    }
    emit_property_attributes(*subject, properties, frame.language);

    Frame &parent = stack_.back();
    if (parent.kind == FrameKind::Property) {
      graph_.insert({*parent.subject, parent.predicate, as_term(*subject)});
    }
    frame.kind = FrameKind::Node;
    frame.subject = std::move(subject);
    stack_.push_back(std::move(frame));
  }

  void emit_property_attributes(const Node &subject, const std::vector<const Attribute *> &attrs,
                                const std::string &language) {
    for (const auto *attr : attrs) {
      if (attr->iri == kRdf + "type") {
        graph_.insert({subject, rdf_type(), resolve_iri(base_, attr->value)});
      } else {
        graph_.insert({subject, Iri{attr->iri}, Literal{attr->value, language, std::nullopt}});
      }
    }
  }

  void start_property(Frame frame, const std::string &element,
                      const std::vector<Attribute> &attrs) {
    if (element == kRdf + "li") unsupported("rdf:li");
    static const std::vector<std::string> forbidden = {
        "RDF", "Description", "ID", "about", "parseType", "resource", "nodeID", "datatype",
        "aboutEach", "aboutEachPrefix", "bagID"};
    for (const auto &term : forbidden) {
      if (element == kRdf + term) fail("rdf:" + term + " cannot be used as a property element");
    }

    Frame &parent = stack_.back();
    std::optional<Term> object;
    std::vector<const Attribute *> properties;
    auto set_object = [&](Term term, const std::string &attr) {
      if (object) fail("property element has both rdf:resource and rdf:nodeID (" + attr + ")");
      object = std::move(term);
    };
    for (const auto &attr : attrs) {
      if (attr.iri == kRdf + "resource") {
        set_object(resolve_iri(base_, attr.value), attr.qname);
      } else if (attr.iri == kRdf + "nodeID") {
        set_object(node_id(attr.value), attr.qname);
      } else if (attr.iri == kRdf + "datatype") {
        frame.datatype = resolve_iri(base_, attr.value);
      } else if (attr.iri == kRdf + "parseType") {
        unsupported("rdf:parseType");
      } else if (attr.iri == kRdf + "ID") {
        unsupported("rdf:ID on a property element (reification)");
      } else if (attr.iri == kRdf + "bagID") {
        unsupported("rdf:bagID");
      } else if (attr.iri == kRdf + "about") {
        unsupported("rdf:about on a property element");
      } else if (attr.iri == kRdf + "aboutEach" || attr.iri == kRdf + "aboutEachPrefix" ||
                 attr.iri == kRdf + "li" || attr.iri == kRdf + "Description" ||
                 attr.iri == kRdf + "RDF") {
        unsupported(attr.qname);
      } else {
        if (attr.iri == kRdf + "label") {
          warn("UNKNOWN_ATTRIBUTE", "rdf:label is not an RDF/XML syntax attribute; read as a "
                                    "property (did you mean rdfs:label?)");
        }
        properties.push_back(&attr);
      }
    }
    if (frame.datatype && (object || !properties.empty())) {
      fail("rdf:datatype cannot be combined with rdf:resource, rdf:nodeID or property attributes");
    }
    if (!properties.empty() && !object) object = as_term(Node{graph_.mint_blank()});
    if (object) {
      graph_.insert({*parent.subject, Iri{element}, *object});
      if (!properties.empty()) {
        emit_property_attributes(*as_node(*object), properties, frame.language);
      }
    }
    frame.kind = FrameKind::Property;
    frame.subject = parent.subject;
    frame.predicate = Iri{element};
    frame.fixed_object = std::move(object);
    stack_.push_back(std::move(frame));
  }

  void end_element(std::string_view) {
    Frame frame = std::move(stack_.back());
    stack_.pop_back();
    if (frame.kind != FrameKind::Property) return;
    if (frame.fixed_object || frame.has_child) {
      if (!is_blank_text(frame.text)) fail("text content alongside a node or resource reference");
      return;
    }
    Literal literal{std::move(frame.text), {}, frame.datatype};
    if (!frame.datatype) literal.language = frame.language;
    graph_.insert({*frame.subject, frame.predicate, std::move(literal)});
  }

  void character_data(std::string_view text) {
    Frame &top = stack_.back();
    if (top.kind == FrameKind::Property) {
      top.text.append(text);
      return;
    }
    if (!is_blank_text(text)) fail("unexpected text outside a property element");
  }

  Graph graph_;
  Iri base_;
  std::vector<ParseWarning> *warnings_;
  XML_Parser parser_ = nullptr;
  std::exception_ptr failure_;
  std::vector<Frame> stack_;
  std::map<std::string, BlankNode> node_ids_;
  std::map<std::string, std::string> namespaces_seen_;
};

} // namespace

Graph parse_rdf_xml(std::string_view document, const Iri &base,
                    std::vector<ParseWarning> *warnings) {
  return Reader(base, warnings).run(document);
}

} // namespace execdesc::rdf
