#pragma once

#include <iosfwd>

namespace rmk::cli {

enum ExitCode : int { kSuccess = 0, kCheckFailure = 1, kUsageError = 2 };

/// Entry point of the rmk tool. Normal output goes to `out`, diagnostics to
/// `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rmk::cli
