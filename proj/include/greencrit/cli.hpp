#pragma once

// Subcommands of the greencrit executable. Each writes its files under
// config.output_dir and a human-readable summary to `out`, and returns the
// process exit status.

#include "greencrit/config.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace greencrit {

enum ExitCode : int {
    kExitPositive = 0,     ///< Finite / Bounded / all checks passed
    kExitNegative = 1,     ///< Divergent / Unbounded / construction refused / failed check
    kExitInconclusive = 2,
    kExitBracket = 3,
    kExitPicardDiverged = 4,
    kExitConfig = 5,
    kExitError = 6,
};

int exit_code(Verdict v);

int cmd_report(const RunConfig& config, std::ostream& out);
int cmd_scan(const RunConfig& config, std::ostream& out);
int cmd_solve(const RunConfig& config, std::ostream& out);
int cmd_verify(const RunConfig& config, std::ostream& out);

struct CheckLine
{
    std::string name;
    bool pass = false;
    std::string detail;
};

/// The checks selected by config.suite, in a fixed order.
std::vector<CheckLine> run_verify_suite(const RunConfig& config);

/// Dispatches on "report", "scan", "solve", "verify" and maps exceptions to
/// exit codes (message on `err`).
int run_command(const std::string& command, const RunConfig& config, std::ostream& out, std::ostream& err);

} // namespace greencrit
