#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace reviewq::cli {

/// Runs one invocation. `args` excludes the program name. Returns the exit
/// code: 0 success, 1 downstream failure, 2 usage error.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace reviewq::cli
