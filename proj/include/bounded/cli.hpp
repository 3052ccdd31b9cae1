#pragma once

#include <string>
#include <vector>

namespace bounded {

inline constexpr const char* kToolVersion = "0.1.0";

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitDimension = 3,
  kExitData = 4,
  kExitConvergence = 5,
};

/// Runs one `bounded-agents` invocation; args excludes the program name.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

}  // namespace bounded
