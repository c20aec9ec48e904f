#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dhocbf::cli {

/// Entry point behind the command-line binary. args excludes the program
/// name. Writes normal output to out and diagnostics to err.
/// Exit codes: 0 success, 1 check or run failure, 2 usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace dhocbf::cli
