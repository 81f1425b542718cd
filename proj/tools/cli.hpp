#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace psgdwa::cli {

/// Exit codes of the psgdwa tool.
inline constexpr int kOk = 0;
inline constexpr int kCheckFailed = 1;
inline constexpr int kUsageError = 2;

/// Entry point shared by main() and the tests. `args` excludes argv[0].
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace psgdwa::cli
