#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dtm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitData = 1;
inline constexpr int kExitUsage = 2;

/// Runs the dtm command line. `args` excludes the program name. Normal output
/// goes to `out`, diagnostics to `err`; the return value is the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dtm::cli
