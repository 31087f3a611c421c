#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace treeanova {

/// Entry point behind the binary: parses `args` (without the program name),
/// runs the requested subcommand, and returns the process exit code
/// (0 success, 2 config error, 3 data error, 4 numeric/convergence error).
int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace treeanova
