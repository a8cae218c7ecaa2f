#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kfss {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitUnbounded = 2;
inline constexpr int kExitVerifyFailed = 3;

/// Runs one `kfss` invocation. `args` excludes the program name. Results go
/// to `out`, diagnostics to `err`; the return value is the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kfss
