#pragma once

// Command-line front end. Kept as a library so tests can drive it in-process.

#include <iosfwd>

namespace tpa {

/// Exit codes: 0 success, 1 numerical failure (the message names the gate),
/// 2 usage error (the message names the flag and a fix).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace tpa
