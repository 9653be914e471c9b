#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace genboost::cli {

enum ExitCode : int {
    kOk = 0,
    kCheckFailed = 1,  // check-loss found an inadmissible slice
    kValidation = 2,
    kRuntime = 3,
    kIo = 4,
};

// Entry point shared by the executable and the tests. `args` excludes the
// program name. Subcommands: train, predict, eval, check-loss, gen.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace genboost::cli
