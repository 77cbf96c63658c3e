#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace delaywave {

// Exit codes: 0 success (including runs that end in blow-up, which is a
// recorded outcome), 2 malformed configuration or parameters, 3
// incomplete spectral root capture, 1 other failures.
int cli_run(const std::vector<std::string>& args, std::ostream& out = std::cout,
            std::ostream& err = std::cerr);

}  // namespace delaywave
