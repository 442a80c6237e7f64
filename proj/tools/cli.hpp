#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fxtfhe::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitFile = 3,
  kExitParameter = 4,
  kExitRuntime = 5,
};

// Runs one verb. args excludes the program name. Errors are written to err
// as a single JSON object.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fxtfhe::cli
