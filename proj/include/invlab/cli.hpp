#pragma once

#include <string>
#include <vector>

namespace invlab {

// Command-line driver. args excludes the program name. Exit codes: 0 all
// requested checks/runs succeeded, 2 a certificate failed, 3 configuration or
// validation error, 4 runtime divergence.
int run_cli(std::vector<std::string> args);

}  // namespace invlab
