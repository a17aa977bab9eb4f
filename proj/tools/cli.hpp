#pragma once

#include <iosfwd>

namespace tlstm::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 2;
inline constexpr int kContract = 3;
inline constexpr int kNumeric = 4;

// Runs one subcommand. Messages go to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tlstm::cli
