#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pintmf::cli {

enum ExitCode : int { kOk = 0, kInputError = 1, kNumericalError = 2 };

/// Runs one command line (args[0] is the program name). Results go to `out`, diagnostics
/// and usage text to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pintmf::cli
