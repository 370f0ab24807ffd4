#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pwarp {

// Runs one pwarp invocation; everything the command prints goes to `out`.
// Returns the process exit code (0 pass, 1 verification fail, 2 parse error,
// 3 math-domain error, 4 degenerate input).
int run_cli(const std::vector<std::string>& args, std::ostream& out);

} // namespace pwarp
