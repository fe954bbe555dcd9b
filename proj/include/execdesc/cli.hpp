#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace execdesc::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kStepFailed = 1,
  kInvalid = 2, // validation, usage or parse error
  kNothingFound = 3,
  kAborted = 4,
};

/// Runs one invocation; `args` excludes the program name. Prompts (init) read
/// from `in`. Reads EXECDESC_CONFIG and EXECDESC_LIBRARIES from the environment.
int run_cli(const std::vector<std::string> &args, std::istream &in, std::ostream &out, std::ostream &err);

/// The interactive authoring session behind `init`. Writes
/// `<dir>/execution-description.rdf`; EOF or an `!abort` answer writes nothing.
int run_wizard(const std::filesystem::path &dir, bool force, std::istream &in, std::ostream &out,
               std::ostream &err);

} // namespace execdesc::cli
