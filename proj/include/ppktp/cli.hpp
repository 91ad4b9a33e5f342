#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ppktp::cli {

enum ExitCode : int { kSuccess = 0, kInputError = 2, kNumericalFailure = 3 };

/// Runs one command line (without the program name). Reports go to `out`,
/// diagnostics to `err`, files to the configured output directory.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ppktp::cli
