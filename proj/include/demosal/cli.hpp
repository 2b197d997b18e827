#pragma once

#include <string>
#include <vector>

namespace demosal {

/// Runs one CLI invocation (argv without the program name). Subcommands:
/// gen-demos, run, probe, curves, compare, transfer, combine. Returns the
/// process exit status: 0 on success, 1 on configuration/validation
/// failures, 2 on usage errors.
int cli_dispatch(const std::vector<std::string>& args);

}  // namespace demosal
