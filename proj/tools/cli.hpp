#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace glkinar::cli {

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNumerical = 4 };

/// Bad flags or parameter combinations.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable or malformed input files.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs one command line (args[0] is the program name). Normal output goes to `out`;
/// diagnostics and the error JSON go to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace glkinar::cli
