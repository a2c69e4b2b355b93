#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hclimits::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 1;
inline constexpr int kSolverError = 2;
inline constexpr int kUnexpectedDivergence = 3;

/// Runs the command line `args` (args[0] is the program name). Results go to
/// the --out target ("-" means `out`); diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hclimits::cli
