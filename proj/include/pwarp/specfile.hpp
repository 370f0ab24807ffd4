#pragma once

#include "pwarp/manifold.hpp"
#include "pwarp/warped.hpp"

#include <string>

namespace pwarp {

// Line-oriented `key = value` files with [section] headers, `#` comments and
// quoted expressions.  Errors carry 1-based line numbers in their message.
ManifoldSpec load_manifold_file(const std::string& path);
WarpedSpec load_warped_file(const std::string& path);

} // namespace pwarp
