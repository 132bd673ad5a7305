#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace matilda::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kSuccess = 0, kUsageError = 1, kDataError = 2 };

// Runs one subcommand. `args` excludes the program name. Help, usage errors
// and data errors go to `err`; the one-line JSON summary goes to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace matilda::cli
