#include "execdesc/executor.hpp"

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <condition_variable>
#include <cstring>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

extern char **environ;

namespace execdesc {

namespace {

std::optional<double> parse_decimal(std::string_view text) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || end != text.data() + text.size() || !std::isfinite(value))
    return std::nullopt;
  return value;
}

std::string show(double value) {
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, end);
}

void check_binding(const ParameterSpec &spec, const std::string &value) {
  switch (spec.kind) {
  case ParameterKind::Unconstrained:
    return;
  case ParameterKind::NumericRange: {
    auto number = parse_decimal(value);
    if (!number) {
      throw BindError(BindError::Kind::NotANumber, spec.name,
                      "parameter " + spec.name + ": '" + value + "' is not a decimal number");
    }
    if (spec.min && *number < *spec.min) {
      throw BindError(BindError::Kind::OutOfRange, spec.name,
                      "parameter " + spec.name + ": " + value + " is below the minimum " + show(*spec.min));
    }
    if (spec.max && *number > *spec.max) {
      throw BindError(BindError::Kind::OutOfRange, spec.name,
                      "parameter " + spec.name + ": " + value + " is above the maximum " + show(*spec.max));
    }
    return;
  }
  case ParameterKind::Enumeration:
    if (std::find(spec.allowed.begin(), spec.allowed.end(), value) == spec.allowed.end()) {
      std::string allowed;
      for (const auto &a : spec.allowed) allowed += (allowed.empty() ? "" : ", ") + a;
      throw BindError(BindError::Kind::NotAllowed, spec.name,
                      "parameter " + spec.name + ": '" + value + "' is not one of {" + allowed + "}");
    }
    return;
  }
}

std::string sanitize(std::string_view name) {
  std::string out;
  for (char c : name) {
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_') ? c : '_';
  }
  if (out.empty() || out == "." || out == "..") out = "step";
  return out;
}

std::vector<std::string> build_environment(const RunOptions &options) {
  std::map<std::string, std::string> env;
  if (options.inherit_environment) {
    for (char **e = environ; e && *e; ++e) {
      std::string_view entry(*e);
      auto eq = entry.find('=');
      if (eq == std::string_view::npos) continue;
      env.emplace(std::string(entry.substr(0, eq)), std::string(entry.substr(eq + 1)));
    }
  }
  for (const auto &[k, v] : options.environment) env[k] = v;
  std::vector<std::string> out;
  for (const auto &[k, v] : env) out.push_back(k + "=" + v);
  return out;
}

// Runs `sh -c command` and waits for it. 127 stands in for any launch failure.
int run_shell(const std::string &command, const std::filesystem::path &working_dir,
              const std::filesystem::path &out_path, const std::filesystem::path &err_path,
              const std::vector<std::string> &environment) {
  int out_fd = ::open(out_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  int err_fd = ::open(err_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (out_fd < 0 || err_fd < 0) {
    if (out_fd >= 0) ::close(out_fd);
    if (err_fd >= 0) ::close(err_fd);
    return 127;
  }

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, 0, "/dev/null", O_RDONLY, 0);
  posix_spawn_file_actions_adddup2(&actions, out_fd, 1);
  posix_spawn_file_actions_adddup2(&actions, err_fd, 2);
  posix_spawn_file_actions_addchdir_np(&actions, working_dir.c_str());

  std::vector<char *> argv{const_cast<char *>("sh"), const_cast<char *>("-c"),
                           const_cast<char *>(command.c_str()), nullptr};
  std::vector<char *> envp;
  for (const auto &entry : environment) envp.push_back(const_cast<char *>(entry.c_str()));
  envp.push_back(nullptr);

  pid_t pid = 0;
  int rc = posix_spawn(&pid, "/bin/sh", &actions, nullptr, argv.data(), envp.data());
  posix_spawn_file_actions_destroy(&actions);
  ::close(out_fd);
  ::close(err_fd);
  if (rc != 0) return 127;

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) return 127;
  }
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return 127;
}

void check_log_dir(const std::filesystem::path &dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ExecutionError("cannot create log directory " + dir.string() + ": " + ec.message());
  auto probe = dir / ".write-probe";
  int fd = ::open(probe.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) {
    throw ExecutionError("log directory " + dir.string() + " is not writable: " + std::strerror(errno));
  }
  ::close(fd);
  std::filesystem::remove(probe, ec);
}

} // namespace

std::string bind_parameters(const CommandTemplate &command, const Bindings &bindings,
                            std::span<const ParameterSpec> specs, bool strict,
                            std::vector<std::string> *warnings) {
  const auto &raw = command.raw;
  auto names = placeholders(raw);
  for (const auto &name : names) {
    auto it = bindings.find(name);
    if (it == bindings.end()) {
      throw BindError(BindError::Kind::MissingBinding, name, "no value bound for ${" + name + "}");
    }
    if (it->second.find("${") != std::string::npos) {
      throw BindError(BindError::Kind::Malformed, name,
                      "value for ${" + name + "} must not contain '${'");
    }
    auto spec = std::find_if(specs.begin(), specs.end(), [&](const auto &s) { return s.name == name; });
    if (spec != specs.end()) check_binding(*spec, it->second);
  }
  for (const auto &[name, _] : bindings) {
    if (std::find(names.begin(), names.end(), name) != names.end()) continue;
    std::string message = "binding '" + name + "' does not appear in \"" + raw + "\"";
    if (strict) throw BindError(BindError::Kind::UnknownName, name, message);
    if (warnings) warnings->push_back(std::move(message));
  }

  std::string out;
  out.reserve(raw.size());
  std::size_t i = 0;
  while (i < raw.size()) {
    auto open = raw.find("${", i);
    if (open == std::string::npos) {
      out.append(raw, i, std::string::npos);
      break;
    }
    out.append(raw, i, open - i);
    auto close = raw.find('}', open + 2);
    std::string name = close == std::string::npos ? std::string{} : raw.substr(open + 2, close - open - 2);
    if (close == std::string::npos || std::find(names.begin(), names.end(), name) == names.end()) {
      throw BindError(BindError::Kind::Malformed, name,
                      "malformed placeholder at offset " + std::to_string(open) + " in \"" + raw + "\"");
    }
    out += bindings.at(name);
    i = close + 1;
  }
  return out;
}

std::string log_name(const rdf::Iri &process) { return sanitize(rdf::short_name(process)); }

ExecutionReport execute_plan(const Plan &plan, const RunOptions &options) {
  if (options.max_parallel < 1) throw ExecutionError("max_parallel must be at least 1");
  std::error_code ec;
  if (!std::filesystem::is_directory(options.working_dir, ec)) {
    throw ExecutionError("working directory " + options.working_dir.string() + " does not exist");
  }
  const auto working_dir = std::filesystem::absolute(options.working_dir);
  const auto log_dir = options.log_dir.is_absolute() ? options.log_dir : working_dir / options.log_dir;

  std::map<rdf::Iri, std::size_t> index;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    if (!index.emplace(plan.steps[i].process, i).second) {
      throw ExecutionError("plan lists <" + plan.steps[i].process.value + "> twice");
    }
    for (const auto &dep : plan.steps[i].depends_on) {
      auto it = index.find(dep);
      if (it == index.end() || it->second >= i) {
        throw ExecutionError("plan step <" + plan.steps[i].process.value + "> precedes its dependency <" +
                             dep.value + ">");
      }
    }
  }

  ExecutionReport report;
  std::set<std::string> taken;
  for (const auto &step : plan.steps) {
    StepResult result;
    result.process = step.process;
    result.bound_command = step.bound_command;
    std::string name = log_name(step.process);
    for (int n = 2; !taken.insert(name).second; ++n) name = log_name(step.process) + "-" + std::to_string(n);
    result.stdout_path = log_dir / (name + ".out");
    result.stderr_path = log_dir / (name + ".err");
    report.steps.push_back(std::move(result));
  }

  if (options.dry_run) {
    report.overall = Outcome::DryRun;
    return report;
  }
  check_log_dir(log_dir);

  const auto environment = build_environment(options);
  enum class State { Pending, Running, Done };
  std::vector<State> state(plan.steps.size(), State::Pending);
  std::mutex mutex;
  std::condition_variable changed;
  std::size_t running = 0;
  std::optional<rdf::Iri> first_failure;
  std::vector<std::thread> workers;

  auto blocker_of = [&](std::size_t i) -> std::optional<rdf::Iri> {
    for (const auto &dep : plan.steps[i].depends_on) {
      const auto &r = report.steps[index.at(dep)];
      if (state[index.at(dep)] != State::Done) continue;
      if (r.status == StepStatus::Failed) return r.process;
      if (r.status == StepStatus::Skipped) return r.blocked_by;
    }
    return std::nullopt;
  };
  auto ready = [&](std::size_t i) {
    return std::all_of(plan.steps[i].depends_on.begin(), plan.steps[i].depends_on.end(), [&](const auto &dep) {
      auto j = index.at(dep);
      return state[j] == State::Done && report.steps[j].status == StepStatus::Succeeded;
    });
  };

  std::unique_lock lock(mutex);
  for (;;) {
    bool progress = true;
    while (progress) {
      progress = false;
      for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        if (state[i] != State::Pending) continue;
        auto blocker = blocker_of(i);
        if (!blocker && first_failure && !options.keep_going) blocker = first_failure;
        if (blocker) {
          state[i] = State::Done;
          report.steps[i].status = StepStatus::Skipped;
          report.steps[i].blocked_by = blocker;
          progress = true;
        }
      }
    }

    for (std::size_t i = 0; i < plan.steps.size() && running < options.max_parallel; ++i) {
      if (state[i] != State::Pending || !ready(i)) continue;
      state[i] = State::Running;
      ++running;
      workers.emplace_back([&, i] {
        auto &result = report.steps[i];
        auto started = std::chrono::system_clock::now();
        int code = run_shell(plan.steps[i].bound_command, working_dir, result.stdout_path,
                             result.stderr_path, environment);
        auto finished = std::chrono::system_clock::now();
        std::lock_guard guard(mutex);
        result.started_at = started;
        result.finished_at = finished;
        result.wall_time = std::chrono::duration_cast<std::chrono::milliseconds>(finished - started);
        if (code == 0) {
          result.status = StepStatus::Succeeded;
        } else {
          result.status = StepStatus::Failed;
          result.exit_code = code;
          if (!first_failure) first_failure = result.process;
        }
        state[i] = State::Done;
        --running;
        changed.notify_all();
      });
    }

    if (running == 0) {
      bool pending = std::any_of(state.begin(), state.end(), [](State s) { return s == State::Pending; });
      if (!pending) break;
    }
    changed.wait(lock);
  }
  lock.unlock();
  for (auto &worker : workers) worker.join();

  bool all_ok = std::all_of(report.steps.begin(), report.steps.end(),
                            [](const StepResult &r) { return r.status == StepStatus::Succeeded; });
  report.overall = all_ok ? Outcome::Success : Outcome::Failure;
  return report;
}

std::string_view to_string(StepStatus status) {
  switch (status) {
  case StepStatus::Succeeded: return "succeeded";
  case StepStatus::Failed: return "failed";
  case StepStatus::Skipped: return "skipped";
  case StepStatus::Planned: return "planned";
  }
  return "unknown";
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
  case Outcome::Success: return "success";
  case Outcome::Failure: return "failure";
  case Outcome::DryRun: return "dry_run";
  }
  return "unknown";
}

std::string render_summary(const ExecutionReport &report) {
  std::ostringstream out;
  for (const auto &step : report.steps) {
    std::string status(to_string(step.status));
    if (step.status == StepStatus::Failed) status += "(" + std::to_string(step.exit_code.value_or(-1)) + ")";
    if (step.status == StepStatus::Skipped && step.blocked_by) status += "(" + rdf::short_name(*step.blocked_by) + ")";
    out << status << "  " << rdf::short_name(step.process) << "  " << step.bound_command;
    if (step.status == StepStatus::Succeeded || step.status == StepStatus::Failed) {
      out << "  (" << step.wall_time.count() << " ms)";
    }
    out << "\n";
  }
  out << "overall: " << to_string(report.overall) << "\n";
  return out.str();
}

std::string render_records(const ExecutionReport &report) {
  std::string out;
  for (const auto &step : report.steps) {
    nlohmann::json record = {
        {"process", step.process.value},
        {"command", step.bound_command},
        {"status", to_string(step.status)},
        {"exit_code", step.exit_code ? nlohmann::json(*step.exit_code) : nlohmann::json()},
        {"duration_ms", step.wall_time.count()},
        {"blocked_by", step.blocked_by ? nlohmann::json(step.blocked_by->value) : nlohmann::json()},
    };
    out += record.dump() + "\n";
  }
  return out;
}

} // namespace execdesc
