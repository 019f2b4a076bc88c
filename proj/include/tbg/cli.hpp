#pragma once

#include <string>
#include <vector>

namespace tbg {

// exit codes: 0 ok, 2 invalid input, 3 compute guard, 4 I/O
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace tbg
