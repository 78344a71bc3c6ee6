#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace shrinksel::cli {

/// Exit codes: 0 success, 1 internal failure, 2 user or config error.
enum ExitCode : int { kOk = 0, kInternal = 1, kUsage = 2 };

/// Entry point shared by the executable and the tests. args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace shrinksel::cli
