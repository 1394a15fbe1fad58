#ifndef FLEETSP_TOOLS_COMMANDS_H_
#define FLEETSP_TOOLS_COMMANDS_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace fleet::cli {

// Process exit codes by failure class.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUnexpected = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitSolver = 4;

// Runs `fleet-sp` with `args` (without the program name). Summaries go to
// `out`, diagnostics to `err`. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fleet::cli

#endif  // FLEETSP_TOOLS_COMMANDS_H_
