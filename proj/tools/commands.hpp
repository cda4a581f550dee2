#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace maximin::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kParse = 2,
  kSingularFit = 3,
  kConditioning = 4,
  kBudget = 5,
  kCheckFailed = 6,
  kDegenerate = 7,
};

/// Entry point shared by the executable and the tests. `out` receives the
/// primary output when --out is not given; `err` receives diagnostics and
/// progress.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace maximin::cli
