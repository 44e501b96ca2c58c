#pragma once

#include <string>
#include <vector>

namespace ctxval {

/// Exit codes: 0 success, 1 data error, 2 usage error.
int run_cli(int argc, const char* const* argv);
/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace ctxval
