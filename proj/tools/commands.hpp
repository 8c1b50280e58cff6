#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rerankkit::cli {

/// Process exit codes, one per failure class.
enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kDataError = 3,
  kSolverError = 4,
  kModelError = 5,
  kMetricError = 6,
};

/// Runs one `rerankkit` invocation. `args[0]` is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rerankkit::cli
