#pragma once

#include "lowlight/color_pipeline.hpp"
#include "lowlight/options.hpp"
#include "lowlight/record.hpp"
#include "lowlight/rng.hpp"
#include "lowlight/sensor_noise.hpp"

#include <vector>

namespace lowlight {

// Inverse ISP chain: invert tone mapping, invert gamma, sRGB->cRGB, invert
// white balance. Input must be SrgbEncoded; output is LinearCamera. When
// trace is given, the color state after each stage is appended to it.
PlanarImage unprocess(const PlanarImage& srgb, const DegradationParams& p, const CcmSet& ccms,
                      long* tone_clamped = nullptr, std::vector<ColorState>* trace = nullptr);

// Forward ISP chain applied to the corrupted linear-camera signal:
// quantization noise, white balance, cRGB->sRGB, gamma correction, then an
// optional tone remap, then the final clip to [0,1]. Output is SrgbEncoded.
PlanarImage reprocess(const PlanarImage& linear_camera, const DegradationParams& p,
                      const CcmSet& ccms, const PipelineOptions& opt, StreamRng& noise_rng,
                      long* clipped = nullptr, long* tone_clamped = nullptr,
                      std::vector<ColorState>* trace = nullptr);

struct DegradeOutput {
  PlanarImage image;
  DegradationRecord record;
};

// Full degrading transformation: reprocess(shot_read(attenuate(unprocess(x)))).
// The record carries the parameters, options, normalized targets and clip
// statistics; caller fills in source/seed/stream/config hash.
DegradeOutput degrade_full(const PlanarImage& srgb, const DegradationParams& p,
                           const PipelineOptions& opt, const CcmSet& ccms,
                           const ParamRanges& ranges, StreamRng& noise_rng,
                           std::vector<ColorState>* trace = nullptr);

}  // namespace lowlight
