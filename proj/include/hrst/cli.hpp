#pragma once

#include <iosfwd>

namespace hrst {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 2,
    kExitResourceCap = 3,
    kExitVerification = 4,
};

/// Entry point of the `hrst` tool: simulate, build, render, experiment and
/// sweep subcommands. Returns the process exit code; diagnostics go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hrst
