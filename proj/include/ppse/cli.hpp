#pragma once

#include <string>
#include <vector>

namespace ppse {

// Exit codes: 0 success, 1 configuration error, 2 numeric failure.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

}  // namespace ppse
