#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ideval {

enum ExitCode : int {
  kExitOk = 0,
  kExitMismatch = 1,
  kExitInvalid = 2,
  kExitNothingToDo = 3,
};

// Runs one command line (args excludes the program name). Results go to out
// unless written to files; diagnostics go to err as one JSON object per line.
int runCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ideval
