#pragma once

#include "lowlight/options.hpp"
#include "lowlight/sensor_noise.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <string>

namespace lowlight {

inline constexpr int kSidecarSchemaVersion = 1;

enum class SynthMethod {
  Ours,
  Retinex,
  InvGamma,
  InvGammaPoisson,
  InvGammaMixed,
  LinearScale,
  OursMosaic,
};

const char* to_string(SynthMethod m);
SynthMethod synth_method_from_string(const std::string& s);

// Per-output sidecar payload: everything needed to re-derive the degraded
// image bit-exactly from its source.
struct DegradationRecord {
  int schema_version = kSidecarSchemaVersion;
  SynthMethod method = SynthMethod::Ours;
  std::string source_id;
  uint64_t seed = 0;
  uint64_t stream = 0;
  std::string config_hash;

  DegradationParams params;  // Ours / OursMosaic

  // Baseline scalar parameters (which ones apply depends on method).
  double baseline_illumination = 0.0;  // Retinex L
  double baseline_scale = 0.0;         // LinearScale k
  double baseline_gamma = 0.0;         // InvGamma* gamma
  double poisson_scale = 0.0;
  double gaussian_std = 0.0;

  PipelineOptions options;
  std::array<double, 5> normalized_targets{};
  long clipped_pixels = 0;
  long tone_clamped = 0;
};

// Min-max normalization of the learnable tuple (k, 1/B, 1/g_r, 1/g_b,
// 1/gamma) over the configured sampling range of each quantity.
std::array<double, 5> normalize_targets(const DegradationParams& p, const ParamRanges& ranges);

// Inverse map; returns the raw quantities (k, B, g_r, g_b, gamma).
std::array<double, 5> denormalize_targets(const std::array<double, 5>& n,
                                          const ParamRanges& ranges);

nlohmann::json record_to_json(const DegradationRecord& rec);
DegradationRecord record_from_json(const nlohmann::json& doc);

}  // namespace lowlight
