#pragma once

#include "lowlight/color_pipeline.hpp"
#include "lowlight/options.hpp"
#include "lowlight/sensor_noise.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace lowlight {

struct BaselineDefaults {
  double poisson_scale = 1000.0;  // photon count scale P in Poisson(P*x)/P
  double gaussian_std = 0.01;     // sigma of the additive Gaussian in the mixed model

  bool operator==(const BaselineDefaults&) const = default;
};

// Fully validated application configuration. Omitted fields fall back to
// the calibrated-table defaults; unknown keys are rejected.
struct AppConfig {
  ParamRanges ranges;
  CcmSet ccms;
  std::string ccm_source = "builtin";
  PipelineOptions pipeline;
  BaselineDefaults baseline;
  std::string log_level = "info";

  // FNV-1a64 of the canonical effective config (everything that affects
  // outputs; log level excluded). Recompute after mutating fields.
  std::string config_hash;

  static AppConfig defaults();
  void rehash();
};

// Empty path or empty file yields pure defaults. Parse errors carry
// line/column; validation errors name the offending field.
AppConfig load_config(const std::filesystem::path& path);

// Structured-text CCM file: named 3x3 matrices, row-major, decimal.
CcmSet load_ccm_file(const std::filesystem::path& path);

std::string canonical_config_json(const AppConfig& cfg);

uint64_t fnv1a64(std::string_view s);

}  // namespace lowlight
