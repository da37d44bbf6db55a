#pragma once

#include <iosfwd>

namespace opfgrad {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInfeasible = 2;

/// Runs the opfgrad command line. Exit codes: 0 success, 1 usage or I/O
/// error, 2 infeasible or degenerate input (data still written).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace opfgrad
