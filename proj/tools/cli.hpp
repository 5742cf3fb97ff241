#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cwseg::cli {

// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kInternal = 1,   // unexpected failure
  kUsage = 2,      // bad flags or arguments
  kIo = 3,         // file could not be read or written, missing prediction
  kFormat = 4,     // malformed or corrupt file contents
  kContract = 5,   // shape, parameter, or contract violation
};

// Runs one command line (args excludes the program name). Reports go to
// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cwseg::cli
