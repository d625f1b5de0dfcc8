#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace geom::cli {

inline constexpr const char* kEngineVersion = "1.0.0";

/// Runs `geom <command> ...` (args exclude the program name). Writes the
/// report to `out` (or to --out) and diagnostics to `err`; returns the exit code:
/// 0 ok, 2 configuration, 3 domain or singular metric, 4 chart validity,
/// 5 invariant failure or numerical quality, 1 internal error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace geom::cli
