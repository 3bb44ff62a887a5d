#pragma once

#include <string>
#include <vector>

namespace dsearch {

// Exit codes: 0 ok, 1 internal error, 2 config error, 3 missing upstream
// artifact, 4 backend/transport error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDependency = 3;
inline constexpr int kExitBackend = 4;

// Runs the CLI; `args` excludes the program name. All commands, flags and
// error-to-exit-code mapping live here so tests can drive the binary
// surface in-process.
int run_cli(const std::vector<std::string>& args);

}  // namespace dsearch
