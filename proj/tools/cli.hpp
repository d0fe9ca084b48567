#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace least::cli {

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // a check or suite did not pass
inline constexpr int kExitUsage = 2;    // bad flags, unreadable or malformed input
inline constexpr int kExitNumeric = 3;  // NaN / Inf during optimisation

/// Runs one command line (args[0] is the subcommand) and returns the exit code.
/// Results go to `out`, diagnostics and progress lines to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace least::cli
