#pragma once

#include <iosfwd>

namespace ust::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsage = 2,
  kIo = 3,
  kNumerical = 4,
  kWeightFormat = 5,
};

// Entry point behind the `ust` executable. Never throws; every failure maps
// to one of the exit codes above with a message on err.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ust::cli
