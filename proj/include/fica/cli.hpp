#pragma once

namespace fica {

// Subcommand front end: moments, predict, simulate, verify, separate.
// Returns 0 on success, 1 on validation errors, 2 on experiment failures.
int run_cli(int argc, char** argv);

}  // namespace fica
