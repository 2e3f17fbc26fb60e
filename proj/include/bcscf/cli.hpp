#pragma once

namespace bcscf {

// Exit codes shared by the CLI and its tests.
namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;  // unexpected error
inline constexpr int argument = 2;
inline constexpr int parse = 3;
inline constexpr int validation = 4;
inline constexpr int numerical = 5;
inline constexpr int io = 6;
inline constexpr int unknown_id = 7;
}  // namespace exit_code

/// Full command-line entry point (argument parsing, dispatch, error-to-exit
/// code mapping). Testable without spawning a process.
int run_cli(int argc, const char* const* argv);

}  // namespace bcscf
