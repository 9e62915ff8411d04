#pragma once

#include <ostream>

namespace stman::cli {

/// Exit statuses of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // contract, parse or I/O error; failed check
inline constexpr int kExitUsage = 2;    // unknown flag or malformed command line

/// Entry point shared by the `stman` executable and in-process tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace stman::cli
