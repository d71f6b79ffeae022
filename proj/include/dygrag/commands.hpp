#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dygrag {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 2,
    kExitData = 3,
    kExitGateway = 4,
};

/// Entry point behind the `dygrag` binary. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dygrag
