#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace forcecbf::cli {

enum ExitCode : int {
  kOk = 0,
  kValidationFailed = 1,
  kConfigError = 2,
  kRuntimeFault = 3,
};

/// Entry point shared by the executable and the tests. args[0] is the
/// program name.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace forcecbf::cli
