#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "execdesc/planner.hpp"
#include "execdesc/vocab.hpp"

namespace execdesc {

class BindError : public std::runtime_error {
public:
  enum class Kind { MissingBinding, OutOfRange, NotANumber, NotAllowed, UnknownName, Malformed };

  BindError(Kind kind, std::string name, const std::string &message)
      : std::runtime_error(message), kind_(kind), name_(std::move(name)) {}

  Kind kind() const { return kind_; }
  const std::string &name() const { return name_; }

private:
  Kind kind_;
  std::string name_;
};

/// Substitutes every `${name}` in the template. Numeric-range parameters must
/// parse as a decimal number inside [min, max]; enumerations must name an
/// allowed value. A binding the template does not use is reported through
/// `warnings`, or thrown as BindError(UnknownName) when `strict`.
std::string bind_parameters(const CommandTemplate &command, const Bindings &bindings,
                            std::span<const ParameterSpec> specs, bool strict,
                            std::vector<std::string> *warnings = nullptr);

struct RunOptions {
  bool dry_run = false;
  bool keep_going = false;
  std::filesystem::path working_dir = ".";
  /// Applied on top of the inherited environment unless `inherit_environment` is false.
  std::map<std::string, std::string> environment;
  bool inherit_environment = true;
  unsigned max_parallel = 1;
  std::filesystem::path log_dir = ".execdesc-logs";
};

enum class StepStatus { Succeeded, Failed, Skipped, Planned };

struct StepResult {
  rdf::Iri process;
  std::string bound_command;
  StepStatus status = StepStatus::Planned;
  /// Set for Failed; 127 when the shell could not be started.
  std::optional<int> exit_code;
  /// Set for Skipped: the failed step that blocked this one.
  std::optional<rdf::Iri> blocked_by;
  std::chrono::system_clock::time_point started_at{};
  std::chrono::system_clock::time_point finished_at{};
  std::chrono::milliseconds wall_time{0};
  std::filesystem::path stdout_path;
  std::filesystem::path stderr_path;
};

enum class Outcome { Success, Failure, DryRun };

struct ExecutionReport {
  std::vector<StepResult> steps;
  Outcome overall = Outcome::Success;
};

class ExecutionError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Runs each step with `sh -c` in `working_dir`, at most `max_parallel` at a
/// time, never before all of its dependencies succeeded. Output goes to
/// `<log_dir>/<name>.out` and `.err`. A failed step skips everything that
/// depends on it; without `keep_going` no new steps start after a failure.
/// Throws ExecutionError when the working or log directory is unusable.
ExecutionReport execute_plan(const Plan &plan, const RunOptions &options);

std::string_view to_string(StepStatus status);
std::string_view to_string(Outcome outcome);

/// Plain-text summary, one line per step plus an overall line.
std::string render_summary(const ExecutionReport &report);
/// One JSON object per line: process, command, status, exit_code, duration_ms.
std::string render_records(const ExecutionReport &report);

/// `<name>` part of the per-step log files.
std::string log_name(const rdf::Iri &process);

} // namespace execdesc
