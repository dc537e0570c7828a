#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kernelgp::cli {

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitNumerical = 3 };

/// Runs `kernelgp <subcommand> [flags]`. args[0] is the program name.
/// Output that the shell would see goes to `out` / `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kernelgp::cli
