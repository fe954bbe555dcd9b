#include "execdesc/cli.hpp"

#include <pthread.h>
#include <signal.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "execdesc/executor.hpp"
#include "execdesc/heuristics.hpp"
#include "execdesc/library.hpp"
#include "execdesc/planner.hpp"
#include "execdesc/purpose.hpp"
#include "execdesc/rdf_xml.hpp"
#include "execdesc/vocab.hpp"

namespace execdesc::cli {

namespace fs = std::filesystem;
using rdf::Iri;

namespace {

// Thrown after the message has been printed.
struct Exit {
  int code;
};

[[noreturn]] void fail(std::ostream &err, int code, const std::string &message) {
  err << "execdesc: " << message << "\n";
  throw Exit{code};
}

std::string read_bytes(const fs::path &file, std::ostream &err) {
  std::ifstream in(file, std::ios::binary);
  if (!in) fail(err, kInvalid, "cannot read " + file.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct Loaded {
  fs::path file;
  std::string document;
  ExecutionDescription description;
};

Loaded load(const fs::path &file, std::ostream &err) {
  Loaded loaded{file, read_bytes(file, err), {}};
  try {
    loaded.description =
        load_description(loaded.document, rdf::file_iri(fs::absolute(file).lexically_normal().string()));
  } catch (const rdf::ParseError &e) {
    fail(err, kInvalid, file.string() + ": " + e.what());
  }
  return loaded;
}

std::string display(const ExecutionDescription &description, const Iri &iri) {
  const auto &base = description.base.value;
  if (!base.empty() && iri.value.size() > base.size() && iri.value.starts_with(base) &&
      iri.value[base.size()] == '#') {
    return iri.value.substr(base.size());
  }
  // Siblings of the description file, e.g. rdf:about="links-to-pub".
  auto dir = base.substr(0, base.rfind('/') + 1);
  if (!dir.empty() && iri.value.size() > dir.size() && iri.value.starts_with(dir) &&
      iri.value.find_first_of("/#", dir.size()) == std::string::npos) {
    return iri.value.substr(dir.size());
  }
  return iri.value;
}

struct Selection {
  std::vector<std::string> targets;
  std::vector<std::string> labels;
  std::vector<std::string> label_substrings;
  std::vector<std::string> documents;
  std::vector<std::string> figures;
  std::vector<std::string> claims;

  bool empty() const {
    return targets.empty() && labels.empty() && label_substrings.empty() && documents.empty() &&
           figures.empty() && claims.empty();
  }
};

void add_selectors(CLI::App *app, Selection &s) {
  app->add_option("--target", s.targets, "process: #fragment, full IRI, or unique short name")
      ->allow_extra_args(false);
  app->add_option("--purpose", s.labels, "select by exact purpose label")->allow_extra_args(false);
  app->add_option("--purpose-contains", s.label_substrings, "select by purpose label substring, any case")
      ->allow_extra_args(false);
  app->add_option("--document", s.documents, "select evidence for a publication IRI")->allow_extra_args(false);
  app->add_option("--figure", s.figures, "select figure generators: DOC[,TITLE]")->allow_extra_args(false);
  app->add_option("--claim", s.claims, "select claim support: IRI or SUBJECT,PREDICATE,OBJECT")
      ->allow_extra_args(false);
}

std::vector<std::string> split(const std::string &text, char separator) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(text);
  while (std::getline(in, part, separator)) parts.push_back(part);
  return parts;
}

Iri resolve_target(const ExecutionDescription &description, const std::string &value, std::ostream &err) {
  Iri candidate = value.starts_with('#') ? Iri{description.base.value + value} : Iri{value};
  if (description.find(candidate)) return candidate;
  std::vector<Iri> hits;
  for (const auto &[id, _] : description.processes) {
    if (rdf::short_name(id) == value) hits.push_back(id);
  }
  if (hits.size() == 1) return hits.front();
  if (hits.empty()) fail(err, kInvalid, "unknown process '" + value + "'");
  std::string names;
  for (const auto &h : hits) names += " <" + h.value + ">";
  fail(err, kInvalid, "'" + value + "' is ambiguous:" + names);
}

std::vector<Iri> select(const ExecutionDescription &description, const Selection &s, std::ostream &err) {
  if (s.empty()) {
    std::vector<Iri> all;
    for (const auto &[id, _] : description.processes) all.push_back(id);
    return all;
  }

  std::vector<purpose::PurposeQuery> queries;
  for (const auto &text : s.labels) queries.push_back(purpose::ByLabel{text, purpose::LabelMatch::Exact});
  for (const auto &text : s.label_substrings) {
    queries.push_back(purpose::ByLabel{text, purpose::LabelMatch::Substring});
  }
  for (const auto &doc : s.documents) queries.push_back(purpose::ByDocument{Iri{doc}});
  for (const auto &figure : s.figures) {
    auto comma = figure.find(',');
    if (comma == std::string::npos) {
      queries.push_back(purpose::ByFigure{Iri{figure}, std::nullopt});
    } else {
      queries.push_back(purpose::ByFigure{Iri{figure.substr(0, comma)}, figure.substr(comma + 1)});
    }
  }
  for (const auto &claim : s.claims) {
    auto parts = split(claim, ',');
    if (parts.size() == 1) {
      queries.push_back(purpose::ByClaim{purpose::RemoteClaim{Iri{claim}}});
    } else if (parts.size() == 3) {
      queries.push_back(purpose::ByClaim{purpose::InlineClaim{Iri{parts[0]}, Iri{parts[1]}, Iri{parts[2]}}});
    } else {
      fail(err, kInvalid, "--claim takes an IRI or SUBJECT,PREDICATE,OBJECT");
    }
  }

  std::set<Iri> selected;
  for (const auto &target : s.targets) selected.insert(resolve_target(description, target, err));
  for (const auto &query : queries) {
    for (auto &id : purpose::select_processes(description, query)) selected.insert(std::move(id));
  }
  return {selected.begin(), selected.end()};
}

struct RunFlags {
  std::vector<std::string> params;
  bool dry_run = false;
  bool keep_going = false;
  unsigned jobs = 1;
  bool strict = false;
  std::string format = "summary";
  std::string workdir;
  std::string log_dir;
};

void add_run_flags(CLI::App *app, RunFlags &f) {
  app->add_option("--param", f.params, "parameter binding NAME=VALUE")->allow_extra_args(false);
  app->add_flag("--dry-run", f.dry_run, "print the plan without running anything");
  app->add_flag("--keep-going", f.keep_going, "keep running steps that do not depend on a failure");
  app->add_option("--jobs,-j", f.jobs, "steps to run at once")->check(CLI::PositiveNumber);
  app->add_flag("--strict", f.strict, "reject bindings no selected command uses");
  app->add_option("--format", f.format, "summary or records")->check(CLI::IsMember({"summary", "records"}));
  app->add_option("--workdir", f.workdir, "directory the commands run in");
  app->add_option("--log-dir", f.log_dir, "where step output is kept, relative to the working directory");
}

Bindings parse_bindings(const std::vector<std::string> &params, std::ostream &err) {
  Bindings bindings;
  for (const auto &param : params) {
    auto eq = param.find('=');
    if (eq == std::string::npos || eq == 0) fail(err, kInvalid, "--param expects NAME=VALUE, got '" + param + "'");
    if (!bindings.emplace(param.substr(0, eq), param.substr(eq + 1)).second) {
      fail(err, kInvalid, "parameter '" + param.substr(0, eq) + "' bound twice");
    }
  }
  return bindings;
}

// Prints diagnostics; returns true when there are errors.
bool report_diagnostics(const ExecutionDescription &description, std::ostream &err) {
  auto diagnostics = validate(description);
  for (const auto &d : diagnostics) err << format(d) << "\n";
  return has_errors(diagnostics);
}

int run_description(const ExecutionDescription &description, const std::vector<Iri> &targets,
                    const RunFlags &flags, const fs::path &default_workdir, std::ostream &out, std::ostream &err) {
  if (report_diagnostics(description, err)) return kInvalid;
  if (targets.empty()) {
    err << "execdesc: selection is empty\n";
    return kNothingFound;
  }
  auto bindings = parse_bindings(flags.params, err);

  Plan plan;
  try {
    plan = build_plan(description, targets, bindings, flags.strict);
  } catch (const PlanError &e) {
    fail(err, kInvalid, e.what());
  } catch (const BindError &e) {
    fail(err, kInvalid, e.what());
  }
  for (const auto &warning : plan.warnings) err << "warning: " << warning << "\n";

  RunOptions options;
  options.dry_run = flags.dry_run;
  options.keep_going = flags.keep_going;
  options.max_parallel = flags.jobs;
  options.working_dir = flags.workdir.empty() ? default_workdir : fs::path(flags.workdir);
  if (!flags.log_dir.empty()) options.log_dir = flags.log_dir;

  ExecutionReport report;
  try {
    report = execute_plan(plan, options);
  } catch (const ExecutionError &e) {
    fail(err, kInvalid, e.what());
  }
  out << (flags.format == "records" ? render_records(report) : render_summary(report));
  return report.overall == Outcome::Failure ? kStepFailed : kOk;
}

fs::path description_dir(const fs::path &file) {
  auto parent = fs::absolute(file).lexically_normal().parent_path();
  return parent.filename() == ".reproduce" ? parent.parent_path() : parent;
}

std::vector<std::string> split_endpoints(const char *text) {
  std::vector<std::string> endpoints;
  if (!text) return endpoints;
  std::string value(text);
  std::replace(value.begin(), value.end(), ',', ' ');
  std::istringstream in(value);
  for (std::string endpoint; in >> endpoint;) endpoints.push_back(endpoint);
  return endpoints;
}

heuristics::Config config_for(const std::string &flag, std::ostream &err) {
  std::string path = flag;
  if (path.empty()) {
    if (const char *env = std::getenv("EXECDESC_CONFIG")) path = env;
  }
  if (path.empty()) return {};
  try {
    return heuristics::load_config(path);
  } catch (const heuristics::ConfigError &e) {
    fail(err, kInvalid, e.what());
  }
}

std::vector<std::string> endpoints_for(const std::vector<std::string> &flag, const heuristics::Config &config) {
  if (!flag.empty()) return flag;
  if (auto env = split_endpoints(std::getenv("EXECDESC_LIBRARIES")); !env.empty()) return env;
  return config.libraries;
}

std::string pad(std::string text, std::size_t width) {
  if (text.size() < width) text.append(width - text.size(), ' ');
  return text;
}

int cmd_validate(const std::string &file, std::ostream &out, std::ostream &err) {
  auto loaded = load(file, err);
  auto diagnostics = validate(loaded.description);
  std::size_t errors = 0;
  for (const auto &d : diagnostics) {
    out << format(d) << "\n";
    if (d.severity == Severity::Error) ++errors;
  }
  std::size_t warnings = diagnostics.size() - errors;
  if (loaded.description.processes.empty()) {
    out << "warning: no processes found\n";
    ++warnings;
  }
  out << loaded.description.processes.size() << " process(es), " << errors << " error(s), " << warnings
      << " warning(s)\n";
  return errors ? kInvalid : kOk;
}

int cmd_list(const std::string &file, const Selection &selection, std::ostream &out, std::ostream &err) {
  auto loaded = load(file, err);
  const auto &description = loaded.description;
  std::vector<std::vector<std::string>> rows{{"ID", "COMMAND", "PURPOSES", "DEPENDS ON"}};
  for (const auto &id : select(description, selection, err)) {
    const auto &process = *description.find(id);
    std::string purposes, deps;
    for (const auto &p : process.purposes) purposes += (purposes.empty() ? "" : "; ") + purpose::summarize(p);
    for (const auto &d : process.depends_on) deps += (deps.empty() ? "" : " ") + display(description, d);
    rows.push_back({display(description, id), process.command.raw, purposes, deps});
  }
  std::vector<std::size_t> widths(4, 0);
  for (const auto &row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());
  }
  for (const auto &row : rows) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) line += i + 1 < row.size() ? pad(row[i], widths[i] + 2) : row[i];
    while (line.ends_with(' ')) line.pop_back();
    out << line << "\n";
  }
  return kOk;
}

int cmd_run(const std::string &file, const Selection &selection, const RunFlags &flags, std::ostream &out,
            std::ostream &err) {
  auto loaded = load(file, err);
  auto targets = select(loaded.description, selection, err);
  return run_description(loaded.description, targets, flags, description_dir(file), out, err);
}

std::string repo_url_or_fail(const std::string &flag, const fs::path &dir, std::ostream &err) {
  if (!flag.empty()) return flag;
  if (auto url = heuristics::git_remote_url(dir)) return *url;
  fail(err, kInvalid, dir.string() + " has no git origin remote; pass --repo-url");
}

struct GuessFlags {
  bool run = false;
  std::string publish_to;
  std::string repo_url;
  std::string config;
};

int cmd_guess(const std::string &dir, const GuessFlags &g, const RunFlags &flags, std::ostream &out,
              std::ostream &err) {
  if (!fs::is_directory(dir)) fail(err, kInvalid, dir + " is not a directory");
  if (!g.publish_to.empty() && (!g.run || flags.dry_run)) {
    fail(err, kInvalid, "--publish needs --run without --dry-run: only a successful guess is uploaded");
  }
  auto config = config_for(g.config, err);
  std::optional<heuristics::Guess> guessed;
  try {
    guessed = heuristics::guess(dir, config.table);
  } catch (const fs::filesystem_error &e) {
    fail(err, kInvalid, e.what());
  }
  if (!guessed) {
    err << "execdesc: no heuristic rule matches " << dir << "\n";
    return kNothingFound;
  }
  auto document = rdf::serialize_rdf_xml(guessed->description.source_graph);
  if (!g.run) {
    out << document;
    return kOk;
  }

  // Resolve the repository before running so a missing URL fails fast.
  std::string repo_url = g.publish_to.empty() ? std::string{} : repo_url_or_fail(g.repo_url, dir, err);
  err << "guessed: " << guessed->rule.name << " -> " << guessed->rule.command << "\n";
  std::vector<Iri> targets;
  for (const auto &[id, _] : guessed->description.processes) targets.push_back(id);
  int code = run_description(guessed->description, targets, flags, dir, out, err);
  if (code != kOk || g.publish_to.empty()) return code;

  try {
    auto record = library::publish(g.publish_to, library::RepoKey::normalize(repo_url), document,
                                   library::Provenance::HeuristicDerived);
    out << "published " << record.id << " (" << library::to_string(record.provenance) << ")\n";
  } catch (const library::LibraryError &e) {
    fail(err, kInvalid, e.what());
  }
  return kOk;
}

struct ResolveFlags {
  std::string repo_url;
  std::vector<std::string> libraries;
  std::string config;
};

int cmd_resolve(const std::string &dir, const ResolveFlags &r, const Selection &selection, const RunFlags &flags,
                std::ostream &out, std::ostream &err) {
  if (!fs::is_directory(dir)) fail(err, kInvalid, dir + " is not a directory");
  auto config = config_for(r.config, err);
  auto endpoints = endpoints_for(r.libraries, config);
  heuristics::ResolutionOutcome outcome;
  try {
    outcome = heuristics::resolve(dir, endpoints, config.table,
                                  r.repo_url.empty() ? std::nullopt : std::optional<std::string>(r.repo_url));
  } catch (const heuristics::ResolutionError &e) {
    fail(err, e.kind() == heuristics::ResolutionError::Kind::NothingFound ? kNothingFound : kInvalid, e.what());
  } catch (const library::LibraryError &e) {
    fail(err, kInvalid, e.what());
  } catch (const fs::filesystem_error &e) {
    fail(err, kInvalid, e.what());
  }
  out << "resolved: " << heuristics::source_tag(outcome) << "\n";
  err << "source: " << outcome.detail << (outcome.endpoint.empty() ? "" : " at " + outcome.endpoint) << "\n";
  auto targets = select(outcome.description, selection, err);
  return run_description(outcome.description, targets, flags, dir, out, err);
}

int cmd_fetch(const std::string &endpoint, const std::string &repo, const std::string &output, std::ostream &out,
              std::ostream &err) {
  std::vector<library::LibraryRecord> records;
  try {
    records = library::fetch(endpoint, library::RepoKey::normalize(repo));
  } catch (const library::LibraryError &e) {
    fail(err, kInvalid, e.what());
  }
  if (records.empty()) {
    err << "execdesc: no description for " << repo << " at " << endpoint << "\n";
    return kNothingFound;
  }
  const auto &newest = records.front();
  err << "record " << newest.id << " (" << library::to_string(newest.provenance) << ", " << newest.submitted_at
      << ")\n";
  if (output.empty() || output == "-") {
    out << newest.document;
  } else {
    std::ofstream file(output, std::ios::binary | std::ios::trunc);
    file << newest.document;
    if (!file.flush()) fail(err, kInvalid, "cannot write " + output);
  }
  return kOk;
}

int cmd_publish(const std::string &endpoint, const std::string &repo, const std::string &file,
                const std::string &provenance_text, std::ostream &out, std::ostream &err) {
  auto provenance = library::parse_provenance(provenance_text);
  if (!provenance) fail(err, kInvalid, "--provenance must be authored or heuristic-derived");
  auto document = read_bytes(file, err);
  try {
    auto record = library::publish(endpoint, library::RepoKey::normalize(repo), document, *provenance);
    out << record.id << "\n";
  } catch (const library::LibraryError &e) {
    fail(err, kInvalid, e.what());
  }
  return kOk;
}

int cmd_serve(const std::string &store, const std::string &host, int port, const std::string &port_file,
              std::ostream &out, std::ostream &err) {
  // SIGINT/SIGTERM are taken by a waiter thread so the server shuts down cleanly.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  sigset_t previous;
  pthread_sigmask(SIG_BLOCK, &signals, &previous);

  int code = kOk;
  try {
    library::LibraryServer server(store);
    if (server.store().skipped_lines()) {
      err << "warning: skipped " << server.store().skipped_lines() << " unreadable line(s) in the record log\n";
    }
    std::thread waiter([&] {
      int signal = 0;
      sigwait(&signals, &signal);
      server.stop();
    });
    try {
      server.run(host, port, [&](int bound) {
        if (!port_file.empty()) {
          auto temp = port_file + ".tmp";
          std::ofstream(temp) << bound << "\n";
          fs::rename(temp, port_file);
        }
        out << "listening on http://" << host << ":" << bound << " with " << server.store().size()
            << " record(s)" << std::endl;
      });
    } catch (const std::exception &e) {
      err << "execdesc: " << e.what() << "\n";
      code = kInvalid;
    }
    // Wake the waiter if the server stopped on its own.
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
  } catch (const std::exception &e) {
    err << "execdesc: " << e.what() << "\n";
    code = kInvalid;
  }
  pthread_sigmask(SIG_SETMASK, &previous, nullptr);
  return code;
}

} // namespace

int run_cli(const std::vector<std::string> &args, std::istream &in, std::ostream &out, std::ostream &err) {
  CLI::App app{"Run experiments from their execution descriptions", "execdesc"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "execdesc 0.1.0");

  std::string file, dir = ".";
  Selection selection;
  RunFlags flags;

  auto *validate_cmd = app.add_subcommand("validate", "check a description and list its diagnostics");
  validate_cmd->add_option("file", file, "description file")->required();

  auto *list_cmd = app.add_subcommand("list", "list the processes of a description");
  list_cmd->add_option("file", file, "description file")->required();
  add_selectors(list_cmd, selection);

  auto *run_cmd = app.add_subcommand("run", "run selected processes with their dependencies");
  run_cmd->add_option("file", file, "description file")->required();
  add_selectors(run_cmd, selection);
  add_run_flags(run_cmd, flags);

  GuessFlags guess_flags;
  auto *guess_cmd = app.add_subcommand("guess", "guess a description from the files in a directory");
  guess_cmd->add_option("dir", dir, "repository directory");
  guess_cmd->add_flag("--run", guess_flags.run, "run the guessed command");
  guess_cmd->add_option("--publish", guess_flags.publish_to, "library endpoint to upload a successful guess to");
  guess_cmd->add_option("--repo-url", guess_flags.repo_url, "repository URL (default: git origin)");
  guess_cmd->add_option("--config", guess_flags.config, "rule table and library config (JSON)");
  add_run_flags(guess_cmd, flags);

  ResolveFlags resolve_flags;
  auto *resolve_cmd = app.add_subcommand("resolve", "find a description (repository, libraries, heuristics) and run it");
  resolve_cmd->add_option("dir", dir, "repository directory");
  resolve_cmd->add_option("--repo-url", resolve_flags.repo_url, "repository URL (default: git origin)");
  resolve_cmd->add_option("--library", resolve_flags.libraries, "library endpoint, in lookup order")
      ->allow_extra_args(false);
  resolve_cmd->add_option("--config", resolve_flags.config, "rule table and library config (JSON)");
  add_selectors(resolve_cmd, selection);
  add_run_flags(resolve_cmd, flags);

  bool force = false;
  auto *init_cmd = app.add_subcommand("init", "write a description by answering questions");
  init_cmd->add_option("dir", dir, "repository directory");
  init_cmd->add_flag("--force", force, "overwrite an existing description");

  std::string endpoint, repo, output, provenance = "authored";
  auto *fetch_cmd = app.add_subcommand("fetch", "print the newest library description for a repository");
  fetch_cmd->add_option("endpoint", endpoint, "library URL")->required();
  fetch_cmd->add_option("repo", repo, "repository URL")->required();
  fetch_cmd->add_option("-o,--output", output, "write to a file instead of stdout");

  auto *publish_cmd = app.add_subcommand("publish", "upload a description to a library");
  publish_cmd->add_option("endpoint", endpoint, "library URL")->required();
  publish_cmd->add_option("repo", repo, "repository URL")->required();
  publish_cmd->add_option("file", file, "description file")->required();
  publish_cmd->add_option("--provenance", provenance, "authored or heuristic-derived");

  std::string store = "library-store", host = "127.0.0.1", port_file;
  int port = 8080;
  auto *serve_cmd = app.add_subcommand("serve", "run a reference library server");
  serve_cmd->add_option("--store", store, "store directory");
  serve_cmd->add_option("--host", host, "bind address");
  serve_cmd->add_option("--port", port, "port, 0 for any free port")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--port-file", port_file, "write the bound port here once listening");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (validate_cmd->parsed()) return cmd_validate(file, out, err);
    if (list_cmd->parsed()) return cmd_list(file, selection, out, err);
    if (run_cmd->parsed()) return cmd_run(file, selection, flags, out, err);
    if (guess_cmd->parsed()) return cmd_guess(dir, guess_flags, flags, out, err);
    if (resolve_cmd->parsed()) return cmd_resolve(dir, resolve_flags, selection, flags, out, err);
    if (init_cmd->parsed()) return run_wizard(dir, force, in, out, err);
    if (fetch_cmd->parsed()) return cmd_fetch(endpoint, repo, output, out, err);
    if (publish_cmd->parsed()) return cmd_publish(endpoint, repo, file, provenance, out, err);
    if (serve_cmd->parsed()) return cmd_serve(store, host, port, port_file, out, err);
  } catch (const Exit &e) {
    return e.code;
  }
  return kInvalid;
}

} // namespace execdesc::cli
