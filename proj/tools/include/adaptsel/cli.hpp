#pragma once

#include <iosfwd>

namespace adaptsel::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kConfig = 2,
  kDivergence = 3,
};

/// Entry point of the `adaptsel` tool with its output streams injected.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace adaptsel::cli
