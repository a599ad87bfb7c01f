#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace erfit::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kParse = 3,
  kNumerical = 4,
  kShape = 5,
};

// Runs one command line (args excludes the program name). Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace erfit::cli
