#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace curbscan {

// Entry point behind the curbscan binary; streams injectable for tests.
// Exit status: 0 success, 1 processing error, 2 usage error.
int run_cli(std::vector<std::string> args, std::ostream& out = std::cout,
            std::ostream& err = std::cerr);

}  // namespace curbscan
