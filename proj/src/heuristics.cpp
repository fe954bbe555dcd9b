#include "execdesc/heuristics.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "execdesc/library.hpp"
#include "execdesc/terms.hpp"

namespace execdesc::heuristics {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path &file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

bool is_glob(std::string_view trigger) { return trigger.find_first_of("*?[") != std::string_view::npos; }

bool triggers(const HeuristicRule &rule, const std::vector<std::string> &entries) {
  if (!is_glob(rule.trigger)) return std::binary_search(entries.begin(), entries.end(), rule.trigger);
  return std::any_of(entries.begin(), entries.end(), [&](const std::string &name) {
    return ::fnmatch(rule.trigger.c_str(), name.c_str(), FNM_PERIOD) == 0;
  });
}

void check_usable(const ExecutionDescription &description, const std::string &where) {
  auto diagnostics = validate(description);
  if (description.processes.empty()) {
    throw ResolutionError(ResolutionError::Kind::InvalidDescription, where + " describes no processes");
  }
  if (has_errors(diagnostics)) {
    std::string text;
    for (const auto &d : diagnostics) {
      if (d.severity == Severity::Error) text += "\n  " + format(d);
    }
    throw ResolutionError(ResolutionError::Kind::InvalidDescription, where + " is invalid:" + text);
  }
}

ExecutionDescription load_checked(const std::string &document, const rdf::Iri &base, const std::string &where) {
  ExecutionDescription description;
  try {
    description = load_description(document, base);
  } catch (const rdf::ParseError &e) {
    throw ResolutionError(ResolutionError::Kind::InvalidDescription, where + " does not parse: " + e.what());
  }
  check_usable(description, where);
  return description;
}

std::string trim(std::string_view s) {
  auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string to_https(const std::string &url) {
  auto sep = url.find("://");
  if (sep == std::string::npos) {
    // scp-like: [user@]host:path
    auto colon = url.find(':');
    auto slash = url.find('/');
    if (colon == std::string::npos || (slash != std::string::npos && slash < colon)) return url;
    std::string host = url.substr(0, colon);
    if (auto at = host.rfind('@'); at != std::string::npos) host = host.substr(at + 1);
    std::string path = url.substr(colon + 1);
    if (!path.starts_with('/')) path.insert(0, "/");
    return "https://" + host + path;
  }
  std::string scheme = url.substr(0, sep);
  if (scheme != "ssh" && scheme != "git" && scheme != "git+ssh") return url;
  std::string rest = url.substr(sep + 3);
  auto slash = rest.find('/');
  std::string authority = rest.substr(0, slash);
  std::string path = slash == std::string::npos ? "" : rest.substr(slash);
  if (auto at = authority.rfind('@'); at != std::string::npos) authority = authority.substr(at + 1);
  if (auto colon = authority.find(':'); colon != std::string::npos) authority.resize(colon);
  return "https://" + authority + path;
}

} // namespace

RuleTable::RuleTable(std::vector<HeuristicRule> rules) : rules_(std::move(rules)) {
  std::set<std::string> names;
  for (const auto &rule : rules_) {
    if (rule.name.empty()) throw std::invalid_argument("heuristic rule without a name");
    if (rule.trigger.empty()) throw std::invalid_argument("heuristic rule '" + rule.name + "' has no trigger");
    if (!names.insert(rule.name).second) {
      throw std::invalid_argument("duplicate heuristic rule name '" + rule.name + "'");
    }
  }
}

RuleTable default_rule_table() {
  return RuleTable({
      {"makefile", "Makefile", "make all"},
      {"snakefile", "Snakefile", "snakemake --cores 1 --use-conda=false"},
      {"docker-compose", "docker-compose.yml", "docker compose up --build"},
      {"run-script", "run.sh", "sh ./run.sh"},
  });
}

Config parse_config(std::string_view text) {
  Config config;
  try {
    auto j = nlohmann::json::parse(text);
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (j.contains("rules")) {
      std::vector<HeuristicRule> rules;
      for (const auto &r : j.at("rules")) {
        rules.push_back({r.at("name").get<std::string>(), r.at("trigger").get<std::string>(),
                         r.at("command").get<std::string>()});
      }
      config.table = RuleTable(std::move(rules));
    }
    if (j.contains("libraries")) config.libraries = j.at("libraries").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  } catch (const std::invalid_argument &e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  }
  return config;
}

Config load_config(const fs::path &file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + file.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

const std::vector<std::string> &conventional_paths() {
  static const std::vector<std::string> paths{"execution-description.rdf", "execution-description.xml",
                                              ".reproduce/execution-description.rdf"};
  return paths;
}

rdf::Iri description_base(const fs::path &repo_dir) {
  return rdf::file_iri((fs::absolute(repo_dir).lexically_normal() / conventional_paths().front()).string());
}

ExecutionDescription synthesize_description(const HeuristicRule &rule, const fs::path &repo_dir) {
  rdf::Graph graph(description_base(repo_dir));
  terms::bind_standard_prefixes(graph);
  ProcessDescriptor process;
  process.id = rdf::Iri{graph.base().value + "#guessed-main"};
  process.command = CommandTemplate::from(rule.command);
  process.purposes.push_back(purpose::Label{"guessed by heuristic: " + rule.name, ""});
  add_process(graph, process);
  return extract(graph);
}

std::optional<Guess> guess(const fs::path &repo_dir, const RuleTable &table) {
  std::vector<std::string> entries;
  for (const auto &entry : fs::directory_iterator(repo_dir)) entries.push_back(entry.path().filename().string());
  std::sort(entries.begin(), entries.end());
  for (const auto &rule : table.rules()) {
    if (triggers(rule, entries)) return Guess{rule, synthesize_description(rule, repo_dir)};
  }
  return std::nullopt;
}

std::string source_tag(const ResolutionOutcome &outcome) {
  switch (outcome.tier) {
  case Tier::RepositoryDescription:
    return "repository-description";
  case Tier::LibraryRecord:
    return "library-record";
  case Tier::Heuristic:
    return "heuristic(" + outcome.detail + ")";
  }
  return {};
}

ResolutionOutcome resolve(const fs::path &repo_dir, const std::vector<std::string> &library_endpoints,
                          const RuleTable &table, const std::optional<std::string> &repo_url) {
  if (!fs::is_directory(repo_dir)) {
    throw ResolutionError(ResolutionError::Kind::NothingFound, repo_dir.string() + " is not a directory");
  }

  for (const auto &relative : conventional_paths()) {
    fs::path file = repo_dir / relative;
    if (!fs::is_regular_file(file)) continue;
    ResolutionOutcome outcome;
    outcome.tier = Tier::RepositoryDescription;
    outcome.detail = file.string();
    outcome.document = read_file(file);
    outcome.description = load_checked(
        outcome.document, rdf::file_iri(fs::absolute(file).lexically_normal().string()), file.string());
    return outcome;
  }

  if (!library_endpoints.empty()) {
    auto url = repo_url ? repo_url : git_remote_url(repo_dir);
    if (!url) {
      throw ResolutionError(ResolutionError::Kind::NoRepositoryUrl,
                            "cannot tell which repository " + repo_dir.string() +
                                " is: it has no git origin remote; pass its URL explicitly");
    }
    auto key = library::RepoKey::normalize(*url);
    for (const auto &endpoint : library_endpoints) {
      auto records = library::fetch(endpoint, key);
      if (records.empty()) continue;
      const auto &newest = records.front();
      ResolutionOutcome outcome;
      outcome.tier = Tier::LibraryRecord;
      outcome.detail = newest.id;
      outcome.endpoint = endpoint;
      outcome.document = newest.document;
      outcome.description = load_checked(newest.document, description_base(repo_dir),
                                         "library record " + newest.id + " from " + endpoint);
      return outcome;
    }
  }

  if (auto guessed = guess(repo_dir, table)) {
    ResolutionOutcome outcome;
    outcome.tier = Tier::Heuristic;
    outcome.detail = guessed->rule.name;
    outcome.document = rdf::serialize_rdf_xml(guessed->description.source_graph);
    outcome.description = std::move(guessed->description);
    return outcome;
  }

  throw ResolutionError(ResolutionError::Kind::NothingFound,
                        "no description resolvable for " + repo_dir.string());
}

std::optional<std::string> git_remote_url(const fs::path &repo_dir) {
  fs::path git = repo_dir / ".git";
  fs::path config;
  if (fs::is_directory(git)) {
    config = git / "config";
  } else if (fs::is_regular_file(git)) {
    // Worktrees and submodules: ".git" holds "gitdir: <path>".
    auto text = read_file(git);
    if (!text.starts_with("gitdir:")) return std::nullopt;
    fs::path gitdir = trim(std::string_view(text).substr(7).substr(0, text.find('\n') - 7));
    if (gitdir.is_relative()) gitdir = repo_dir / gitdir;
    config = fs::is_regular_file(gitdir / "commondir")
                 ? gitdir / trim(read_file(gitdir / "commondir")) / "config"
                 : gitdir / "config";
  } else {
    return std::nullopt;
  }
  std::ifstream in(config);
  if (!in) return std::nullopt;

  std::optional<std::string> origin, first;
  std::string section, line;
  while (std::getline(in, line)) {
    auto text = trim(line);
    if (text.empty() || text.front() == '#' || text.front() == ';') continue;
    if (text.front() == '[') {
      section = text;
      continue;
    }
    if (!section.starts_with("[remote \"")) continue;
    auto eq = text.find('=');
    if (eq == std::string::npos || trim(text.substr(0, eq)) != "url") continue;
    auto url = to_https(trim(text.substr(eq + 1)));
    if (section == "[remote \"origin\"]" && !origin) origin = url;
    if (!first) first = url;
  }
  return origin ? origin : first;
}

} // namespace execdesc::heuristics
