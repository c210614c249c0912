#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pursuitlab::cli {

enum ExitCode : int { kSuccess = 0, kUsage = 1, kRuntime = 2 };

/// Runs one invocation. `args` excludes the program name.
int execute(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pursuitlab::cli
