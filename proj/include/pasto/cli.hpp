#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pasto {

enum ExitCode : int { kExitOk = 0, kExitConfigError = 1, kExitRuntimeError = 2 };

// Subcommands: run, oracle, validate, sweep. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pasto
