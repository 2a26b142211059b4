#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cbn::cli {

enum ExitCode : int { kSuccess = 0, kFails = 1, kUnknown = 2, kUsage = 3 };

/// Runs one invocation; args excludes the program name. Reports go to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cbn::cli
