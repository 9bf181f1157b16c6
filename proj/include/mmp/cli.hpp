#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mmp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitEngine = 3;

/// Runs one command line; args excludes the program name. Models are read
/// from the positional file argument, or from `in` when it is absent or "-".
/// Results go to `out` unless --out names a file; diagnostics go to `err`.
int dispatch(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace mmp::cli
