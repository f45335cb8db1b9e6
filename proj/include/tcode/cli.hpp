#pragma once

#include <iosfwd>

namespace tcode {

inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitInfeasible = 2,
  kExitRuntime = 3,
};

/// Entry point for the `tcode` tool. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tcode
