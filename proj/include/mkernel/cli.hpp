#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mkernel::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitViolation = 2;

inline constexpr int kSchemaVersion = 1;

/// Runs one subcommand. args excludes the program name. The JSON report goes
/// to --output when given, otherwise to out; diagnostics go to err.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace mkernel::cli
