#pragma once

#include <string>
#include <vector>

namespace lvc {

// Entry point behind main(). Exit codes: 0 success, 1 usage error, 2 data
// error, 3 decode integrity failure.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace lvc
