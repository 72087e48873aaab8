#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pilot::cli {

enum ExitCode : int {
  kOk = 0,
  kValidation = 1,  // bad input: parse, validation, lookup, dimension errors
  kExecution = 2,   // a pipeline stage failed
  kIo = 3,
};

/// Runs the command line `args` (args[0] is the program name) and returns the
/// process exit code. Results go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pilot::cli
