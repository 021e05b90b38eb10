#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace krtv {

/// Exit codes of cli_main.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs the command line `krtv <args...>` (args excludes the program name).
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace krtv
