#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pirlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;     // bad flags, invalid parameters, unreadable input
inline constexpr int kExitFailure = 2;   // an audit or correctness check did not hold

// Runs one subcommand. args excludes the program name. Structured output
// goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pirlab::cli
