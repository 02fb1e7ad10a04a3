#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wificue::cli {

enum ExitStatus {
  kExitOk = 0,
  kExitRuntime = 1,
  kExitUsage = 2,
  kExitAvoid = 3,
};

// Runs one command. `args` excludes the program name. Data goes to `out`,
// diagnostics to `err`. Environment variables are read from the process.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wificue::cli
