#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace persona::cli {

/// Process exit codes shared by every subcommand.
enum ExitCode : int {
  kSuccess = 0,
  kSemanticFailure = 1,  // validation problems, failed gradient check
  kIoOrParseError = 2,
  kPrecondition = 3,
};

/// Runs `persona-motion <args...>`; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace persona::cli
