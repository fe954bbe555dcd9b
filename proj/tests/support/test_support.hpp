#pragma once

// Shared helpers for the unit and acceptance tests: fixture access, temp
// directories, an N-Triples reader, a brute-force blank-node isomorphism
// check, and random description/DAG generators.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "execdesc/rdf.hpp"
#include "execdesc/terms.hpp"
#include "execdesc/vocab.hpp"

namespace testsupport {

namespace fs = std::filesystem;
using execdesc::rdf::BlankNode;
using execdesc::rdf::Iri;
using execdesc::rdf::Literal;
using execdesc::rdf::Node;
using execdesc::rdf::Term;
using execdesc::rdf::Triple;

inline std::string read_file(const fs::path &file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_file(const fs::path &file, const std::string &text) {
  fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  out << text;
}

inline fs::path data_dir() { return EXECDESC_TEST_DATA; }
inline fs::path fixture_path() { return data_dir() / "execution-description.rdf"; }
inline std::string fixture_text() { return read_file(fixture_path()); }

// Base the frozen oracle dump was produced with.
inline const Iri kOracleBase{"file:///w/execution-description.rdf"};

class TempDir {
public:
  TempDir() {
    std::string pattern = (fs::temp_directory_path() / "execdesc-test-XXXXXX").string();
    if (!::mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
    path_ = pattern;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;

  const fs::path &path() const { return path_; }
  fs::path operator/(const std::string &name) const { return path_ / name; }

private:
  fs::path path_;
};

// --- N-Triples -------------------------------------------------------------

class NTriplesReader {
public:
  explicit NTriplesReader(std::string_view line) : s_(line) {}

  Triple triple() {
    auto subject = term();
    auto predicate = term();
    auto object = term();
    skip_space();
    expect('.');
    auto node = execdesc::rdf::as_node(subject);
    if (!node || !std::holds_alternative<Iri>(predicate)) throw std::runtime_error("bad triple");
    return {*node, std::get<Iri>(predicate), object};
  }

private:
  void skip_space() {
    while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t')) ++i_;
  }
  void expect(char c) {
    if (i_ >= s_.size() || s_[i_] != c) throw std::runtime_error(std::string("expected ") + c);
    ++i_;
  }
  static void append_utf8(std::string &out, unsigned long cp) {
    if (cp < 0x80) {
      out += static_cast<char>(cp);
    } else if (cp < 0x800) {
      out += static_cast<char>(0xC0 | (cp >> 6));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
      out += static_cast<char>(0xE0 | (cp >> 12));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (cp >> 18));
      out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    }
  }
  std::string until(char end) {
    std::string out;
    while (i_ < s_.size() && s_[i_] != end) {
      char c = s_[i_++];
      if (c != '\\') {
        out += c;
        continue;
      }
      char e = s_[i_++];
      switch (e) {
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      case 'r': out += '\r'; break;
      case '"': out += '"'; break;
      case '\\': out += '\\'; break;
      case 'u':
      case 'U': {
        std::size_t width = e == 'u' ? 4 : 8;
        append_utf8(out, std::stoul(std::string(s_.substr(i_, width)), nullptr, 16));
        i_ += width;
        break;
      }
      default: throw std::runtime_error("bad escape");
      }
    }
    expect(end);
    return out;
  }
  Term term() {
    skip_space();
    if (i_ >= s_.size()) throw std::runtime_error("truncated line");
    if (s_[i_] == '<') {
      ++i_;
      return Iri{until('>')};
    }
    if (s_.substr(i_, 2) == "_:") {
      i_ += 2;
      auto start = i_;
      while (i_ < s_.size() && s_[i_] != ' ' && s_[i_] != '\t') ++i_;
      return BlankNode{std::string(s_.substr(start, i_ - start))};
    }
    expect('"');
    Literal literal{until('"'), {}, std::nullopt};
    if (i_ < s_.size() && s_[i_] == '@') {
      auto start = ++i_;
      while (i_ < s_.size() && s_[i_] != ' ') ++i_;
      literal.language = std::string(s_.substr(start, i_ - start));
    } else if (s_.substr(i_, 2) == "^^") {
      i_ += 3;
      literal.datatype = Iri{until('>')};
    }
    return literal;
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

inline std::vector<Triple> parse_ntriples(const std::string &text) {
  std::vector<Triple> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line.front() == '#') continue;
    out.push_back(NTriplesReader(line).triple());
  }
  return out;
}

inline std::vector<Triple> triples_of(const execdesc::rdf::Graph &graph) { return {graph.begin(), graph.end()}; }

// --- isomorphism -----------------------------------------------------------

// Backtracking search for a blank-node bijection mapping `a` onto `b`.
// Deliberately naive: every candidate assignment is tried, pruned only by
// checking the triples whose blank nodes are all assigned.
class IsomorphismOracle {
public:
  IsomorphismOracle(const std::vector<Triple> &a, const std::vector<Triple> &b)
      : a_(a.begin(), a.end()), b_(b.begin(), b.end()) {
    for (const auto &t : a_) collect(t, blanks_a_);
    for (const auto &t : b_) collect(t, blanks_b_);
  }

  bool isomorphic() {
    if (a_.size() != b_.size() || blanks_a_.size() != blanks_b_.size()) return false;
    order_.assign(blanks_a_.begin(), blanks_a_.end());
    return assign(0);
  }

  const std::map<std::string, std::string> &mapping() const { return map_; }

private:
  static void collect(const Triple &t, std::set<std::string> &out) {
    if (auto *b = std::get_if<BlankNode>(&t.subject)) out.insert(b->label);
    if (auto *b = std::get_if<BlankNode>(&t.object)) out.insert(b->label);
  }

  // Empty optional when some blank in `t` is unassigned.
  std::optional<Triple> image(const Triple &t) const {
    Triple out = t;
    if (auto *b = std::get_if<BlankNode>(&t.subject)) {
      auto it = map_.find(b->label);
      if (it == map_.end()) return std::nullopt;
      out.subject = BlankNode{it->second};
    }
    if (auto *b = std::get_if<BlankNode>(&t.object)) {
      auto it = map_.find(b->label);
      if (it == map_.end()) return std::nullopt;
      out.object = BlankNode{it->second};
    }
    return out;
  }

  bool consistent() const {
    for (const auto &t : a_) {
      auto mapped = image(t);
      if (mapped && !b_.contains(*mapped)) return false;
    }
    return true;
  }

  bool assign(std::size_t index) {
    if (index == order_.size()) return consistent();
    for (const auto &candidate : blanks_b_) {
      if (used_.contains(candidate)) continue;
      map_[order_[index]] = candidate;
      used_.insert(candidate);
      if (consistent() && assign(index + 1)) return true;
      used_.erase(candidate);
      map_.erase(order_[index]);
    }
    return false;
  }

  std::set<Triple> a_, b_;
  std::set<std::string> blanks_a_, blanks_b_;
  std::vector<std::string> order_;
  std::map<std::string, std::string> map_;
  std::set<std::string> used_;
};

inline bool isomorphic(const std::vector<Triple> &a, const std::vector<Triple> &b) {
  return IsomorphismOracle(a, b).isomorphic();
}

inline std::size_t blank_count(const std::vector<Triple> &triples) {
  std::set<std::string> labels;
  for (const auto &t : triples) {
    if (auto *b = std::get_if<BlankNode>(&t.subject)) labels.insert(b->label);
    if (auto *b = std::get_if<BlankNode>(&t.object)) labels.insert(b->label);
  }
  return labels.size();
}

// --- random descriptions ---------------------------------------------------

inline std::string random_text(std::mt19937 &rng) {
  static const std::vector<std::string> pieces{
      "run",  "make", " ",  "data", "<tag>", "a & b", "\"quoted\"", "it's", "\ttab", "line\nbreak",
      "  ",   "ümlaut", "→", "x=1", "${", "}", "$HOME", "]]>", "--flag", "%20"};
  std::uniform_int_distribution<std::size_t> count(1, 5), pick(0, pieces.size() - 1);
  std::string out;
  for (std::size_t i = count(rng); i > 0; --i) out += pieces[pick(rng)];
  return out;
}

// A graph built from 1..max_processes random descriptors plus, budget
// permitting, stray blank-node structure (shared nodes, cycles, roots).
inline execdesc::rdf::Graph random_description_graph(std::mt19937 &rng, const Iri &base,
                                                     std::size_t max_processes = 8, std::size_t max_blanks = 12) {
  using namespace execdesc;
  namespace p = execdesc::purpose;
  rdf::Graph graph(base);
  terms::bind_standard_prefixes(graph);
  auto coin = [&](double probability) { return std::bernoulli_distribution(probability)(rng); };
  auto below = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };

  std::string dir = base.value.substr(0, base.value.rfind('/') + 1);
  std::size_t n = 1 + below(max_processes);
  std::vector<Iri> ids;
  for (std::size_t i = 0; i < n; ++i) {
    std::string name = "step" + std::to_string(i) + (coin(0.3) ? "-x" : "");
    switch (below(3)) {
    case 0: ids.push_back(Iri{base.value + "#" + name}); break;
    case 1: ids.push_back(Iri{dir + name}); break;
    default: ids.push_back(Iri{"http://example.org/other/" + name}); break;
    }
  }

  const std::vector<Iri> docs{Iri{"https://doi.org/10.1234/123456789"}, Iri{"https://example.com/paper"},
                              Iri{base.value + "#local-doc"}};
  std::size_t budget = max_blanks;
  auto spend = [&](std::size_t cost) {
    if (budget < cost) return false;
    budget -= cost;
    return true;
  };

  for (std::size_t i = 0; i < n; ++i) {
    ProcessDescriptor d;
    d.id = ids[i];
    std::string command = random_text(rng);
    if (coin(0.5)) command += " ${alpha}";
    if (coin(0.3)) command += " ${beta_2}";
    d.command = CommandTemplate::from(command);
    for (std::size_t k = below(4); k > 0; --k) {
      switch (below(5)) {
      case 0: {
        static const std::vector<std::string> langs{"", "en", "de-CH"};
        d.purposes.push_back(p::Label{random_text(rng), langs[below(3)]});
        break;
      }
      case 1:
        if (spend(1)) d.purposes.push_back(p::EvidenceFor{docs[below(docs.size())]});
        break;
      case 2:
        if (spend(2)) {
          p::GeneratesFigure f;
          if (coin(0.7)) f.title = "Figure " + std::to_string(below(9)) + (coin(0.5) ? "b" : "");
          if (coin(0.7)) f.part_of = docs[below(docs.size())];
          d.purposes.push_back(f);
        }
        break;
      case 3:
        if (spend(1)) d.purposes.push_back(p::SupportsClaim{p::RemoteClaim{Iri{"https://example.com/a#c" + std::to_string(below(3))}}});
        break;
      default:
        if (spend(2)) {
          d.purposes.push_back(p::SupportsClaim{p::InlineClaim{Iri{"http://www.wikidata.org/entity/Q" + std::to_string(below(99))},
                                                               Iri{"http://www.wikidata.org/prop/direct/P1060"},
                                                               Iri{"http://www.wikidata.org/entity/Q15304532"}}});
        }
      }
    }
    std::set<std::string> names;
    for (std::size_t k = below(3); k > 0; --k) {
      if (!spend(1)) break;
      ParameterSpec spec;
      spec.name = coin(0.5) ? "alpha" : "beta_2";
      if (!names.insert(spec.name).second) {
        budget += 1;
        continue;
      }
      switch (below(3)) {
      case 0: break;
      case 1:
        spec.kind = ParameterKind::NumericRange;
        spec.min = static_cast<double>(below(10));
        spec.max = *spec.min + 0.5 * static_cast<double>(below(20));
        break;
      default:
        spec.kind = ParameterKind::Enumeration;
        spec.allowed = {"low", "high & mighty"};
        if (coin(0.5)) spec.allowed.push_back("<mid>");
      }
      d.parameters.push_back(spec);
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && coin(0.25)) d.depends_on.push_back(ids[j]);
    }
    add_process(graph, d);
  }

  const Iri see_also{"http://example.org/extra/seeAlso"};
  const Iri next{"http://example.org/extra/next"};
  const Iri note{"http://example.org/extra/note"};
  if (budget >= 1 && n >= 2 && coin(0.5)) {
    // One blank node shared by two processes.
    auto shared = graph.mint_blank();
    graph.insert({Node{ids[0]}, see_also, shared});
    graph.insert({Node{ids[1]}, see_also, shared});
    graph.insert({shared, note, Literal{"shared", "", std::nullopt}});
    budget -= 1;
  }
  if (budget >= 2 && coin(0.5)) {
    // A two-node blank cycle hanging off a process.
    auto b1 = graph.mint_blank();
    auto b2 = graph.mint_blank();
    graph.insert({Node{ids[below(n)]}, see_also, b1});
    graph.insert({b1, next, b2});
    graph.insert({b2, next, b1});
    budget -= 2;
  }
  if (budget >= 1 && coin(0.5)) {
    // An unreferenced blank subject.
    auto root = graph.mint_blank();
    graph.insert({root, note, Literal{"42", "", Iri{"http://www.w3.org/2001/XMLSchema#integer"}}});
    graph.insert({root, see_also, ids[below(n)]});
    budget -= 1;
  }
  return graph;
}

// --- random DAGs -----------------------------------------------------------

// Nodes named with random distinct letters so that lexicographic order and
// insertion order disagree; edges point from dependent to dependency and
// follow a random permutation, so the result is acyclic.
inline std::map<Iri, std::vector<Iri>> random_dag(std::mt19937 &rng, std::size_t max_nodes = 6) {
  std::string letters = "abcdefghijklmnopqrstuvwxyz";
  std::shuffle(letters.begin(), letters.end(), rng);
  std::size_t n = std::uniform_int_distribution<std::size_t>(1, max_nodes)(rng);
  std::vector<Iri> nodes;
  for (std::size_t i = 0; i < n; ++i) nodes.push_back(Iri{std::string("urn:dag:") + letters[i]});
  std::bernoulli_distribution edge(0.4);
  std::map<Iri, std::vector<Iri>> deps;
  for (std::size_t i = 0; i < n; ++i) {
    auto &out = deps[nodes[i]];
    for (std::size_t j = 0; j < i; ++j) {
      if (edge(rng)) out.push_back(nodes[j]);
    }
  }
  return deps;
}

inline execdesc::ExecutionDescription description_from_edges(const std::map<Iri, std::vector<Iri>> &deps) {
  execdesc::ExecutionDescription description;
  for (const auto &[id, on] : deps) {
    execdesc::ProcessDescriptor d;
    d.id = id;
    d.command = execdesc::CommandTemplate::from("echo " + execdesc::rdf::short_name(id));
    d.depends_on = on;
    std::sort(d.depends_on.begin(), d.depends_on.end());
    description.processes.emplace(id, d);
  }
  return description;
}

// Reachability by Warshall's algorithm over an adjacency matrix.
inline std::set<Iri> closure_oracle(const std::map<Iri, std::vector<Iri>> &deps, const std::vector<Iri> &targets) {
  std::vector<Iri> nodes;
  for (const auto &[id, _] : deps) nodes.push_back(id);
  std::size_t n = nodes.size();
  auto index = [&](const Iri &iri) { return std::lower_bound(nodes.begin(), nodes.end(), iri) - nodes.begin(); };
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    reach[i][i] = true;
    for (const auto &d : deps.at(nodes[i])) reach[i][index(d)] = true;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (reach[i][k] && reach[k][j]) reach[i][j] = true;
  std::set<Iri> out;
  for (const auto &t : targets)
    for (std::size_t j = 0; j < n; ++j)
      if (reach[index(t)][j]) out.insert(nodes[j]);
  return out;
}

inline bool is_topological(const std::vector<Iri> &order, const std::map<Iri, std::vector<Iri>> &deps) {
  std::map<Iri, std::size_t> position;
  for (std::size_t i = 0; i < order.size(); ++i) position[order[i]] = i;
  for (const auto &id : order) {
    for (const auto &d : deps.at(id)) {
      if (!position.contains(d) || position[d] > position[id]) return false;
    }
  }
  return true;
}

// Every valid topological order of `nodes`, by permutation enumeration in
// lexicographic order.
inline std::vector<std::vector<Iri>> all_topological_orders(const std::set<Iri> &nodes,
                                                            const std::map<Iri, std::vector<Iri>> &deps) {
  std::vector<Iri> perm(nodes.begin(), nodes.end());
  std::map<Iri, std::vector<Iri>> restricted;
  for (const auto &id : perm) {
    for (const auto &d : deps.at(id)) {
      if (nodes.contains(d)) restricted[id].push_back(d);
    }
    restricted[id];
  }
  std::vector<std::vector<Iri>> out;
  do {
    if (is_topological(perm, restricted)) out.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

} // namespace testsupport
