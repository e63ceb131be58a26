#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ringrc::cli {

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_numeric = 3 };

/// Runs the `ringrc` command line. `args` excludes the program name.
/// Reports go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

inline constexpr const char* manifest_name = "manifest.json";
inline constexpr const char* results_name = "results.csv";

}  // namespace ringrc::cli
