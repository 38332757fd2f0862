#pragma once

#include <iosfwd>

namespace dsparse {

/// Exit status of the command-line front end.
enum ExitCode : int {
    kExitOk = 0,
    kExitNumerical = 1, ///< solver or projection did not converge
    kExitInput = 2,     ///< bad flags, unreadable or malformed files
};

/// Parses argv and runs one subcommand (norm, decompose, solve, theory,
/// experiment, ball). Results go to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace dsparse
