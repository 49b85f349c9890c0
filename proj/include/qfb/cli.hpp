#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qfb {

inline constexpr const char* kToolName = "qfb";
inline constexpr const char* kVersion = "1.0.0";

/// Runs one `qfb` subcommand. args excludes the program name. Returns the
/// process exit status: 0 success, 2 usage, 3 domain, 4 accuracy, 5 I/O.
/// Tables go to `out` (or --out); diagnostics go to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qfb
