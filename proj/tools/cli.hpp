#pragma once

#include <iostream>

namespace droplab {

/// Exit codes of cli_dispatch.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitVerifyFailed = 2;

/// Parses argv (argv[0] is the program name) and runs one subcommand.
/// Primary output goes to `out` unless --out names a directory.
int cli_dispatch(int argc, const char *const *argv, std::ostream &out = std::cout,
                 std::ostream &err = std::cerr);

} // namespace droplab
