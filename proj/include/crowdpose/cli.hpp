#pragma once

// The crowdpose-kit command line.

#include <iosfwd>
#include <string>
#include <vector>

namespace crowdpose {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand. `args` excludes the program name. Data goes to files
/// or `out`, diagnostics to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace crowdpose
