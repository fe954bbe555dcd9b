#include "execdesc/rdf.hpp"

#include <algorithm>
#include <filesystem>
#include <stdexcept>

namespace execdesc::rdf {

namespace {

std::string escape_literal(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
    case '\\': out += "\\\\"; break;
    case '"': out += "\\\""; break;
    case '\n': out += "\\n"; break;
    case '\r': out += "\\r"; break;
    case '\t': out += "\\t"; break;
    default: out += c;
    }
  }
  return out;
}

struct UriParts {
  std::optional<std::string> scheme;
  std::optional<std::string> authority;
  std::string path;
  std::optional<std::string> query;
  std::optional<std::string> fragment;
};

UriParts split_uri(std::string_view ref) {
  UriParts parts;
  if (has_scheme(ref)) {
    auto colon = ref.find(':');
    parts.scheme = std::string(ref.substr(0, colon));
    ref.remove_prefix(colon + 1);
  }
  if (auto hash = ref.find('#'); hash != std::string_view::npos) {
    parts.fragment = std::string(ref.substr(hash + 1));
    ref = ref.substr(0, hash);
  }
  if (auto q = ref.find('?'); q != std::string_view::npos) {
    parts.query = std::string(ref.substr(q + 1));
    ref = ref.substr(0, q);
  }
  if (ref.starts_with("//")) {
    ref.remove_prefix(2);
    auto slash = ref.find('/');
    parts.authority = std::string(ref.substr(0, slash));
    ref = slash == std::string_view::npos ? std::string_view{} : ref.substr(slash);
  }
  parts.path = std::string(ref);
  return parts;
}

std::string remove_dot_segments(std::string input) {
  std::string output;
  while (!input.empty()) {
    if (input.starts_with("../")) {
      input.erase(0, 3);
    } else if (input.starts_with("./")) {
      input.erase(0, 2);
    } else if (input.starts_with("/./")) {
      input.replace(0, 3, "/");
    } else if (input == "/.") {
      input = "/";
    } else if (input.starts_with("/../") || input == "/..") {
      input = input.size() == 3 ? std::string("/") : input.replace(0, 4, "/");
      auto last = output.rfind('/');
      output.erase(last == std::string::npos ? 0 : last);
    } else if (input == "." || input == "..") {
      input.clear();
    } else {
      auto start = input.front() == '/' ? 1u : 0u;
      auto next = input.find('/', start);
      output += input.substr(0, next);
      input.erase(0, next == std::string::npos ? input.size() : next);
    }
  }
  return output;
}

std::string recompose(const UriParts &parts) {
  std::string out;
  if (parts.scheme) out += *parts.scheme + ":";
  if (parts.authority) out += "//" + *parts.authority;
  out += parts.path;
  if (parts.query) out += "?" + *parts.query;
  if (parts.fragment) out += "#" + *parts.fragment;
  return out;
}

} // namespace

std::string to_ntriples(const Iri &iri) { return "<" + iri.value + ">"; }

std::string to_ntriples(const BlankNode &node) { return "_:" + node.label; }

std::string to_ntriples(const Literal &literal) {
  std::string out = "\"" + escape_literal(literal.lexical) + "\"";
  if (!literal.language.empty()) {
    out += "@" + literal.language;
  } else if (literal.datatype) {
    out += "^^" + to_ntriples(*literal.datatype);
  }
  return out;
}

std::string to_ntriples(const Node &node) {
  return std::visit([](const auto &n) { return to_ntriples(n); }, node);
}

std::string to_ntriples(const Term &term) {
  return std::visit([](const auto &t) { return to_ntriples(t); }, term);
}

std::string to_ntriples(const Triple &triple) {
  return to_ntriples(triple.subject) + " " + to_ntriples(triple.predicate) + " " +
         to_ntriples(triple.object) + " .";
}

Term as_term(const Node &node) {
  return std::visit([](const auto &n) -> Term { return n; }, node);
}

std::optional<Node> as_node(const Term &term) {
  if (const auto *iri = std::get_if<Iri>(&term)) return Node{*iri};
  if (const auto *blank = std::get_if<BlankNode>(&term)) return Node{*blank};
  return std::nullopt;
}

bool has_scheme(std::string_view reference) {
  if (reference.empty() || !std::isalpha(static_cast<unsigned char>(reference.front())))
    return false;
  for (char c : reference) {
    if (c == ':') return true;
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '-' && c != '.')
      return false;
  }
  return false;
}

Iri resolve_iri(const Iri &base, std::string_view reference) {
  UriParts ref = split_uri(reference);
  if (ref.scheme) {
    ref.path = remove_dot_segments(ref.path);
    return Iri{recompose(ref)};
  }
  UriParts b = split_uri(base.value);
  UriParts target;
  target.scheme = b.scheme;
  if (ref.authority) {
    target.authority = ref.authority;
    target.path = remove_dot_segments(ref.path);
    target.query = ref.query;
  } else {
    target.authority = b.authority;
    if (ref.path.empty()) {
      target.path = b.path;
      target.query = ref.query ? ref.query : b.query;
    } else {
      if (ref.path.front() == '/') {
        target.path = remove_dot_segments(ref.path);
      } else {
        std::string merged;
        if (b.authority && b.path.empty()) {
          merged = "/" + ref.path;
        } else {
          auto slash = b.path.rfind('/');
          merged = (slash == std::string::npos ? std::string{} : b.path.substr(0, slash + 1)) +
                   ref.path;
        }
        target.path = remove_dot_segments(merged);
      }
      target.query = ref.query;
    }
  }
  target.fragment = ref.fragment;
  return Iri{recompose(target)};
}

std::string strip_fragment(std::string_view iri) {
  return std::string(iri.substr(0, iri.find('#')));
}

std::string short_name(const Iri &iri) {
  const auto &v = iri.value;
  if (auto hash = v.find('#'); hash != std::string::npos && hash + 1 < v.size())
    return v.substr(hash + 1);
  std::string_view path = std::string_view(v).substr(0, v.find_first_of("?#"));
  while (path.ends_with('/')) path.remove_suffix(1);
  auto slash = path.rfind('/');
  auto name = slash == std::string_view::npos ? path : path.substr(slash + 1);
  return name.empty() ? v : std::string(name);
}

Iri file_iri(const std::string &path) {
  auto absolute = std::filesystem::absolute(path).lexically_normal().generic_string();
  std::string encoded;
  for (unsigned char c : absolute) {
    if (std::isalnum(c) || std::string_view("/-._~").find(static_cast<char>(c)) != std::string_view::npos) {
      encoded += static_cast<char>(c);
    } else {
      static constexpr char hex[] = "0123456789ABCDEF";
      encoded += '%';
      encoded += hex[c >> 4];
      encoded += hex[c & 0xF];
    }
  }
  return Iri{"file://" + encoded};
}

bool Graph::insert(Triple triple) {
  auto check = [this](const BlankNode &node) {
    if (!owns(node))
      throw std::invalid_argument("blank node _:" + node.label + " was not minted by this graph");
  };
  if (const auto *blank = std::get_if<BlankNode>(&triple.subject)) check(*blank);
  if (const auto *blank = std::get_if<BlankNode>(&triple.object)) check(*blank);
  return triples_.insert(std::move(triple)).second;
}

BlankNode Graph::mint_blank() {
  std::string label;
  do {
    label = "b" + std::to_string(next_blank_++);
  } while (minted_.contains(label));
  minted_.insert(label);
  return BlankNode{label};
}

bool Graph::owns(const BlankNode &node) const { return minted_.contains(node.label); }

void Graph::bind_namespace(std::string prefix, std::string iri) {
  namespaces_[std::move(prefix)] = std::move(iri);
}

std::vector<Triple> Graph::match(const std::optional<Node> &subject,
                                 const std::optional<Iri> &predicate,
                                 const std::optional<Term> &object) const {
  std::vector<std::pair<std::string, const Triple *>> hits;
  auto consider = [&](const Triple &t) {
    if (predicate && t.predicate != *predicate) return;
    if (object && t.object != *object) return;
    hits.emplace_back(to_ntriples(t), &t);
  };
  if (subject) {
    // Triples are ordered by subject first, so the range for one subject is contiguous.
    auto it = triples_.lower_bound(Triple{*subject, Iri{}, Iri{}});
    for (; it != triples_.end() && it->subject == *subject; ++it) consider(*it);
  } else {
    for (const auto &t : triples_) consider(t);
  }
  std::sort(hits.begin(), hits.end(), [](const auto &a, const auto &b) {
    const Triple &x = *a.second;
    const Triple &y = *b.second;
    auto xs = to_ntriples(x.subject), ys = to_ntriples(y.subject);
    if (xs != ys) return xs < ys;
    if (x.predicate != y.predicate) return x.predicate.value < y.predicate.value;
    return to_ntriples(x.object) < to_ntriples(y.object);
  });
  std::vector<Triple> out;
  out.reserve(hits.size());
  for (const auto &[_, t] : hits) out.push_back(*t);
  return out;
}

std::vector<Term> Graph::objects(const Node &subject, const Iri &predicate) const {
  std::vector<Term> out;
  for (auto &t : match(subject, predicate, std::nullopt)) out.push_back(std::move(t.object));
  return out;
}

bool Graph::has_type(const Node &subject, const Iri &type) const {
  return contains(Triple{subject, rdf_type(), type});
}

std::vector<Node> Graph::subjects() const {
  std::set<Node> seen;
  for (const auto &t : triples_) seen.insert(t.subject);
  std::vector<Node> out(seen.begin(), seen.end());
  std::sort(out.begin(), out.end(),
            [](const Node &a, const Node &b) { return to_ntriples(a) < to_ntriples(b); });
  return out;
}

std::vector<Triple> triples_matching(const Graph &graph, const std::optional<Node> &subject,
                                     const std::optional<Iri> &predicate,
                                     const std::optional<Term> &object) {
  return graph.match(subject, predicate, object);
}

} // namespace execdesc::rdf
