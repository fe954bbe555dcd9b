#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "execdesc/vocab.hpp"

namespace execdesc::heuristics {

/// `trigger` is a file name in the repository root, or an fnmatch glob over
/// the names of root entries when it contains `*`, `?` or `[`.
struct HeuristicRule {
  std::string name;
  std::string trigger;
  std::string command;

  friend bool operator==(const HeuristicRule &, const HeuristicRule &) = default;
};

/// First match wins, in list order.
class RuleTable {
public:
  RuleTable() = default;
  /// Throws std::invalid_argument on duplicate or empty names.
  explicit RuleTable(std::vector<HeuristicRule> rules);

  const std::vector<HeuristicRule> &rules() const { return rules_; }
  bool empty() const { return rules_.empty(); }

private:
  std::vector<HeuristicRule> rules_;
};

/// makefile, snakefile, docker-compose, run-script.
RuleTable default_rule_table();

/// `{"rules":[{"name","trigger","command"}...], "libraries":["http://..."]}`.
/// Absent keys keep the defaults (default table, no libraries).
struct Config {
  RuleTable table = default_rule_table();
  std::vector<std::string> libraries;
};

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

Config parse_config(std::string_view text);
Config load_config(const std::filesystem::path &file);

/// execution-description.rdf, execution-description.xml,
/// .reproduce/execution-description.rdf, in lookup order.
const std::vector<std::string> &conventional_paths();

/// Base IRI for a description that lives (or would live) in `repo_dir` under
/// the first conventional name.
rdf::Iri description_base(const std::filesystem::path &repo_dir);

struct Guess {
  HeuristicRule rule;
  ExecutionDescription description;
};

/// Throws std::filesystem::filesystem_error when `repo_dir` cannot be read.
std::optional<Guess> guess(const std::filesystem::path &repo_dir, const RuleTable &table);

/// A single process `#guessed-main` running the rule's command, labelled
/// "guessed by heuristic: <rule name>".
ExecutionDescription synthesize_description(const HeuristicRule &rule,
                                            const std::filesystem::path &repo_dir);

enum class Tier { RepositoryDescription, LibraryRecord, Heuristic };

struct ResolutionOutcome {
  Tier tier = Tier::RepositoryDescription;
  /// Description path, library record id, or rule name, depending on tier.
  std::string detail;
  ExecutionDescription description;
  /// The RDF/XML the description was read from (serialized for heuristics).
  std::string document;
  /// Library endpoint that supplied the record; empty for other tiers.
  std::string endpoint;
};

/// "repository-description", "library-record" or "heuristic(<rule>)".
std::string source_tag(const ResolutionOutcome &outcome);

class ResolutionError : public std::runtime_error {
public:
  enum class Kind { NothingFound, InvalidDescription, NoRepositoryUrl };

  ResolutionError(Kind kind, const std::string &message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

/// Repository description first, then each library endpoint in order, then
/// the rule table. A description that exists but does not parse or has
/// error diagnostics stops resolution. Library transport errors propagate as
/// library::LibraryError. `repo_url` defaults to the git origin remote; it is
/// required only when there are endpoints to ask.
ResolutionOutcome resolve(const std::filesystem::path &repo_dir, const std::vector<std::string> &library_endpoints,
                          const RuleTable &table, const std::optional<std::string> &repo_url = std::nullopt);

/// URL of the `origin` remote (else the first remote) from the repository's
/// git config, with scp-style and ssh remotes rewritten to https.
std::optional<std::string> git_remote_url(const std::filesystem::path &repo_dir);

} // namespace execdesc::heuristics
