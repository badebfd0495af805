#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gramion::cli {

/// Runs the `gramion` command line with the given arguments (without the
/// program name) and returns the process exit code: 0 success, 1 I/O,
/// 2 validation, 3 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gramion::cli
