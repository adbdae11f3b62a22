#pragma once

#include <string>

namespace lowlight {

// "literal" treats B as the divisor in 1/(2B); "bitdepth" treats B as an
// ADC bit count with step 1/2^B. Both are recorded in the sidecar.
enum class QuantMode { Literal, BitDepth };

enum class CcmMode { PickOne, ConvexMixture };

const char* to_string(QuantMode m);
const char* to_string(CcmMode m);
QuantMode quant_mode_from_string(const std::string& s);
CcmMode ccm_mode_from_string(const std::string& s);

struct PipelineOptions {
  QuantMode quant_mode = QuantMode::Literal;
  CcmMode ccm_mode = CcmMode::PickOne;
  bool tone_remap = false;    // reapply tone mapping after the final gamma
  bool mosaic = false;        // route through the Bayer mosaic variant
  bool quant_enabled = true;  // quantization noise injection on/off

  bool operator==(const PipelineOptions&) const = default;
};

}  // namespace lowlight
