#pragma once

#include <string>
#include <vector>

namespace onto::cli {

// Entry point shared by the binary and the tests. Returns the process
// exit code: 0 success, 1 runtime failure, 2 usage error.
int run(const std::vector<std::string>& args);

}  // namespace onto::cli
