#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <regex>
#include <set>
#include <sstream>

#include "detail/cycles.hpp"
#include "execdesc/cli.hpp"
#include "execdesc/heuristics.hpp"
#include "execdesc/rdf_xml.hpp"
#include "execdesc/terms.hpp"
#include "execdesc/vocab.hpp"

namespace execdesc::cli {

namespace fs = std::filesystem;

namespace {

struct Aborted {};

class Prompter {
public:
  Prompter(std::istream &in, std::ostream &out) : in_(in), out_(out) {}

  std::string ask(const std::string &question) {
    out_ << question << std::flush;
    std::string answer;
    if (!std::getline(in_, answer)) throw Aborted{};
    if (!answer.empty() && answer.back() == '\r') answer.pop_back();
    auto first = answer.find_first_not_of(" \t");
    answer = first == std::string::npos ? "" : answer.substr(first, answer.find_last_not_of(" \t") - first + 1);
    if (answer == "!abort") throw Aborted{};
    return answer;
  }

  void say(const std::string &line) { out_ << line << "\n"; }

private:
  std::istream &in_;
  std::ostream &out_;
};

struct Step {
  std::string id;
  std::string command;
  std::string label;
  std::vector<std::string> depends_on;
};

std::vector<std::string> words(const std::string &text) {
  std::string spaced = text;
  std::replace(spaced.begin(), spaced.end(), ',', ' ');
  std::istringstream in(spaced);
  std::vector<std::string> out;
  for (std::string w; in >> w;) {
    if (w.starts_with('#')) w.erase(0, 1);
    out.push_back(w);
  }
  return out;
}

bool valid_id(const std::string &id) {
  static const std::regex pattern("[A-Za-z_][A-Za-z0-9_.-]*");
  return std::regex_match(id, pattern);
}

std::string publication_iri(const std::string &answer) {
  std::string doi = answer;
  if (doi.starts_with("doi:")) doi.erase(0, 4);
  if (doi.starts_with("10.") && doi.find('/') != std::string::npos) return "https://doi.org/" + doi;
  return answer;
}

std::optional<ParameterSpec> parse_bounds(const std::string &name, const std::string &answer) {
  ParameterSpec spec;
  spec.name = name;
  if (answer.empty()) return spec;
  if (auto dots = answer.find(".."); dots != std::string::npos) {
    auto number = [](const std::string &text) -> std::optional<double> {
      try {
        std::size_t used = 0;
        double value = std::stod(text, &used);
        if (used == text.size()) return value;
      } catch (const std::exception &) {
      }
      return std::nullopt;
    };
    auto low = number(answer.substr(0, dots));
    auto high = number(answer.substr(dots + 2));
    if (!low || !high || *low > *high) return std::nullopt;
    spec.kind = ParameterKind::NumericRange;
    spec.min = low;
    spec.max = high;
    return spec;
  }
  std::set<std::string> seen;
  std::istringstream in(answer);
  for (std::string value; std::getline(in, value, '|');) {
    auto first = value.find_first_not_of(" \t");
    if (first == std::string::npos) return std::nullopt;
    value = value.substr(first, value.find_last_not_of(" \t") - first + 1);
    if (!seen.insert(value).second) return std::nullopt;
    spec.allowed.push_back(value);
  }
  spec.kind = ParameterKind::Enumeration;
  return spec;
}

std::optional<std::vector<std::string>> cycle_with(const std::vector<Step> &steps) {
  std::map<std::string, std::vector<std::string>> edges;
  for (const auto &s : steps) edges[s.id] = s.depends_on;
  auto cycles = detail::find_cycles(edges);
  if (cycles.empty()) return std::nullopt;
  return cycles.front();
}

} // namespace

int run_wizard(const fs::path &dir, bool force, std::istream &in, std::ostream &out, std::ostream &err) {
  const fs::path target = dir / heuristics::conventional_paths().front();
  if (!fs::is_directory(dir)) {
    err << "execdesc: " << dir.string() << " is not a directory\n";
    return kInvalid;
  }
  if (fs::exists(target) && !force) {
    err << "execdesc: " << target.string() << " already exists; use --force to replace it\n";
    return kInvalid;
  }

  Prompter ask(in, out);
  std::vector<Step> steps;
  std::string publication;
  std::set<std::string> applies_to;
  std::map<std::string, std::vector<ParameterSpec>> parameters;

  try {
    ask.say("Enter the commands that run this experiment, one at a time. Leave the command empty when done.");
    while (true) {
      auto command = ask.ask("Command " + std::to_string(steps.size() + 1) + ": ");
      if (command.empty()) {
        if (!steps.empty()) break;
        ask.say("At least one command is needed.");
        continue;
      }
      Step step;
      step.command = command;
      std::string fallback = "step-" + std::to_string(steps.size() + 1);
      while (true) {
        auto id = ask.ask("Name for this step [" + fallback + "]: ");
        if (id.empty()) id = fallback;
        if (id.starts_with('#')) id.erase(0, 1);
        if (!valid_id(id)) {
          ask.say("Names start with a letter or _ and use letters, digits, _ . or -.");
        } else if (std::any_of(steps.begin(), steps.end(), [&](const Step &s) { return s.id == id; })) {
          ask.say("There is already a step called " + id + ".");
        } else {
          step.id = id;
          break;
        }
      }
      step.label = ask.ask("What does this step do? ");
      steps.push_back(std::move(step));
    }

    if (steps.size() > 1) {
      for (auto &step : steps) {
        while (true) {
          auto answer = ask.ask("Steps that must finish before " + step.id + " (space separated, empty for none): ");
          std::vector<std::string> deps;
          std::string problem;
          for (const auto &w : words(answer)) {
            if (w == step.id) {
              problem = "A step cannot depend on itself.";
            } else if (std::none_of(steps.begin(), steps.end(), [&](const Step &s) { return s.id == w; })) {
              problem = "There is no step called " + w + ".";
            } else if (std::find(deps.begin(), deps.end(), w) == deps.end()) {
              deps.push_back(w);
            }
          }
          if (problem.empty()) {
            step.depends_on = deps;
            if (auto cycle = cycle_with(steps)) {
              std::string path;
              for (const auto &id : *cycle) path += (path.empty() ? "" : " -> ") + id;
              problem = "That makes a cycle: " + path + ".";
              step.depends_on.clear();
            }
          }
          if (problem.empty()) break;
          ask.say(problem);
        }
      }
    }

    publication = publication_iri(ask.ask("What publication is this part of? (DOI or URL, empty to skip): "));
    if (!publication.empty()) {
      if (steps.size() == 1) {
        applies_to.insert(steps.front().id);
      } else {
        while (true) {
          auto answer = ask.ask("Which steps produce results for it? (space separated, empty for all): ");
          auto chosen = words(answer);
          if (chosen.empty()) {
            for (const auto &s : steps) applies_to.insert(s.id);
            break;
          }
          auto unknown = std::find_if(chosen.begin(), chosen.end(), [&](const std::string &w) {
            return std::none_of(steps.begin(), steps.end(), [&](const Step &s) { return s.id == w; });
          });
          if (unknown == chosen.end()) {
            applies_to.insert(chosen.begin(), chosen.end());
            break;
          }
          ask.say("There is no step called " + *unknown + ".");
        }
      }
    }

    for (const auto &step : steps) {
      for (const auto &name : placeholders(step.command)) {
        while (true) {
          auto answer = ask.ask("Allowed values for ${" + name + "} in " + step.id +
                                " (min..max, a|b|c, or empty for any): ");
          if (auto spec = parse_bounds(name, answer)) {
            parameters[step.id].push_back(*spec);
            break;
          }
          ask.say("Give a range like 1..10 or choices like small|large.");
        }
      }
    }
  } catch (const Aborted &) {
    err << "execdesc: aborted, nothing written\n";
    return kAborted;
  }

  rdf::Graph graph(heuristics::description_base(dir));
  terms::bind_standard_prefixes(graph);
  for (const auto &step : steps) {
    ProcessDescriptor process;
    process.id = rdf::Iri{graph.base().value + "#" + step.id};
    process.command = CommandTemplate::from(step.command);
    if (!step.label.empty()) process.purposes.push_back(purpose::Label{step.label, "en"});
    if (applies_to.contains(step.id)) process.purposes.push_back(purpose::EvidenceFor{rdf::Iri{publication}});
    for (const auto &dep : step.depends_on) process.depends_on.push_back(rdf::Iri{graph.base().value + "#" + dep});
    process.parameters = parameters[step.id];
    add_process(graph, process);
  }

  auto document = rdf::serialize_rdf_xml(graph);
  auto temp = target;
  temp += ".tmp";
  {
    std::ofstream file(temp, std::ios::binary | std::ios::trunc);
    file << document;
    if (!file.flush()) {
      err << "execdesc: cannot write " << target.string() << "\n";
      std::error_code ec;
      fs::remove(temp, ec);
      return kInvalid;
    }
  }
  std::error_code ec;
  fs::rename(temp, target, ec);
  if (ec) {
    err << "execdesc: cannot write " << target.string() << ": " << ec.message() << "\n";
    fs::remove(temp, ec);
    return kInvalid;
  }
  out << "wrote " << target.string() << " with " << steps.size() << " step(s)\n";
  return kOk;
}

} // namespace execdesc::cli
