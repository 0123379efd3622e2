#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lowrank::cli {

// Exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // numerical failures and anything unexpected
inline constexpr int kExitArgument = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitIo = 4;

// Parses "start:stop:step" (inclusive, tolerant to rounding) or a
// comma-separated list.
std::vector<double> parse_grid(const std::string& text);

// Runs one subcommand. A JSON summary (resolved configuration and written
// files) goes to `out`; errors are reported as one JSON object on `err`.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace lowrank::cli
