#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hvdc::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kModelMismatch = 1,    ///< validation failed or a scenario did not complete
  kConfigError = 2,      ///< bad flags, bad config, violated precondition
  kNumericalError = 3,   ///< synthesis or simulation failure
  kOutputError = 4,      ///< output directory or file not writable
};

/// Runs one command line (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hvdc::cli
