#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lowint::cli {

/// Process exit codes.
enum ExitCode : int { kOk = 0, kDomainError = 1, kUsageError = 2 };

/// Runs one CLI invocation. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lowint::cli
