#pragma once

#include <string>
#include <vector>

namespace shearlab {

/// Entry point behind tools/shearlab.cpp, exposed for in-process testing.
/// Exit codes: 0 success, 2 validation failure, 3 numerical failure,
/// 4 configuration error.
int run_cli(const std::vector<std::string>& args);

}  // namespace shearlab
