#pragma once

// Command-line front end for batch experiments: single runs, beta sweeps,
// condition analyses, grid-refinement studies, and runs on externally
// supplied Matrix Market systems. Subcommands write CSV or JSON records
// with a stable schema so outputs can be diffed and plotted directly.

#include <string>
#include <vector>

namespace blocksplit {

/// Entry point of the command-line tool; args excludes the program name.
/// Returns the process exit code: 0 on success, 1 on an invalid
/// configuration, 2 on a runtime failure (a study that cannot complete, or
/// any DIVERGED / INNER_FAILURE record under --strict).
int run_cli(const std::vector<std::string>& args);

}  // namespace blocksplit
