#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cyclone {

enum ExitCode : int {
  kExitOk = 0,
  kExitRuntime = 1,
  kExitUsage = 2,
};

/// Entry point of the `cyclone` tool. `args` excludes the program name.
/// Errors go to `err` as one JSON line: {"error":"usage"|"runtime","message":...}.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cyclone
