#pragma once

#include <ostream>

namespace smk::cli {

inline constexpr const char* kToolVersion = "1.0.0";

/// Entry point of the `smk` tool. Reports go to `out` (or the --out file),
/// warnings and errors to `err`. Returns the process exit status:
/// 0 when at least one item succeeded, 2 on total failure or bad usage.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace smk::cli
