#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace raretype::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitNotConverged = 3;  // also infeasible assignments

/// Runs one command line (args excludes the program name). Results go to
/// `out` unless --out is given; diagnostics go to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace raretype::cli
