// photocount experiment harness: argument parsing, parameter layering and
// the per-command pipelines that write CSV plus a JSON run manifest.
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace photocount::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitBreakdown = 3;

/// Runs one command. `args` excludes the program name. CSV goes to --out or
/// to `out`; diagnostics go to `err`. Returns the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace photocount::cli
