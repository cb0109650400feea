#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace clicksel::cli {

// Exit codes: 0 success, 1 usage error, 2..11 clicksel::ErrorCode values,
// 12 any other failure.
inline constexpr int kUsageError = 1;
inline constexpr int kInternalError = 12;

/// Runs one invocation; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace clicksel::cli
