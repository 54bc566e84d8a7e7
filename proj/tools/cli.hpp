#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rh {

// Runs one rhplan subcommand. args excludes the program name. Exit codes:
// 0 success, 1 usage, 2 bad input data or configuration, 3 runtime failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rh
