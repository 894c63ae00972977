#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace vowelprompt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

/// Runs one subcommand (`args` excludes the program name). Reports go to
/// `out`, diagnostics to `err`. Returns the process exit code.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace vowelprompt::cli
