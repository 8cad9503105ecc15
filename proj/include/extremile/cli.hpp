#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace extremile {

/// Runs one command line (args[0] is the program name). Returns the process
/// exit code: 0 success, 2 data error, 3 convergence failure, 4 config error.
/// Failures print one line "error: <CODE>: <message>" to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace extremile
