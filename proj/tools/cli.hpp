#pragma once

#include <iosfwd>

namespace rmcp::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,
  kRuntimeError = 2,
  kAcceptanceFailure = 3,
};

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rmcp::cli
