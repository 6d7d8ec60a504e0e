#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nocpsn::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitInvalidConfig = 2,
  kExitBudgetExhausted = 3,
};

inline constexpr const char* kVersion = "0.1.0";

/// Runs one command line, program name excluded. Results go to `out`;
/// diagnostics and progress go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nocpsn::cli
