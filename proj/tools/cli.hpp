#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace bridgeord::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kValidation = 3,
  kSampling = 4,
  kIo = 5,
};

/// Runs one subcommand (`args[0]` is the program name). Progress goes to `out`,
/// categorized error messages to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace bridgeord::cli
