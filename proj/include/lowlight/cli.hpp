#pragma once

#include <string>
#include <vector>

namespace lowlight {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kConfigEnvVar = "LOWLIGHT_CONFIG";

// Subcommand dispatcher. Exit codes: 0 success, 1 per-file failures,
// 2 configuration or usage errors.
int run_cli(const std::vector<std::string>& args);

}  // namespace lowlight
