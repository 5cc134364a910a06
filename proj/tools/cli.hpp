#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace xlalign {

inline constexpr const char* kVersion = "0.1.0";

// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,      // I/O and anything unexpected
  kBadInput = 2,     // unparsable files, invalid flags or synthetic settings
  kEmptySeed = 3,
  kDivergence = 4,
  kNoEvaluable = 5,
};

// Runs one subcommand; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace xlalign
