/**
 * @file cli.hpp
 * @brief `dsi-bench plan|simulate|sweep <profile> [flags]`.
 *
 * `<profile>` is a path to a profile file or the name of a bundled profile
 * (e.g. `inhouse`, `imagenet22k-azure`). Exit codes: 0 success, 1 runtime
 * failure, 2 usage, parse or profile error.
 */
#pragma once

#include <filesystem>
#include <ostream>
#include <string_view>

namespace dsi {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Directory searched for bundled profiles when the argument is not an existing file.
/// `DSI_BENCH_PROFILE_DIR` overrides the compiled-in location.
std::filesystem::path bundled_profile_dir();

/// Resolves a profile argument to a file path; returns the argument unchanged if nothing matches.
std::filesystem::path resolve_profile(std::string_view arg);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dsi
