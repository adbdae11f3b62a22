#pragma once

#include "lowlight/color_pipeline.hpp"
#include "lowlight/image.hpp"
#include "lowlight/options.hpp"
#include "lowlight/rng.hpp"

#include <span>
#include <vector>

namespace lowlight {

struct UniformRange {
  double lo = 0.0;
  double hi = 1.0;

  bool operator==(const UniformRange&) const = default;
};

// Sampling ranges for every degradation parameter. Defaults mirror the
// calibrated parameter table the pipeline ships with; every field can be
// overridden from the config file.
struct ParamRanges {
  // Light attenuation k: truncated Gaussian.
  double k_mean = 0.1;
  double k_std = 0.08;
  UniformRange k_bounds{0.01, 1.0};

  // Shot noise gain: log10 delta_s uniform.
  UniformRange log10_delta_s{-4.0, -2.0};

  // Read noise law: log10 delta_r ~ N(slope * log10 delta_s + intercept, std^2).
  double read_law_slope = 2.18;
  double read_law_intercept = 0.12;
  double read_law_std = 0.26;

  std::vector<int> bit_choices{12, 14, 16};

  UniformRange g_r{1.9, 2.4};
  UniformRange g_b{1.5, 1.9};
  UniformRange gamma{2.0, 3.5};

  double epsilon = 1e-5;

  void validate() const;  // throws ConfigError

  bool operator==(const ParamRanges&) const = default;
};

// The sampled ground truth of one degradation event.
struct DegradationParams {
  double k = 1.0;
  double delta_s = 0.0;
  double delta_r = 0.0;
  int bits = 14;
  double g_r = 1.0;
  double g_b = 1.0;
  CcmSelection ccm;
  double gamma = 1.0;
  double epsilon = 1e-5;

  GammaParams gamma_params() const { return {gamma, epsilon}; }

  bool operator==(const DegradationParams&) const = default;
};

// Draw order is fixed (k, delta_s, delta_r, bits, g_r, g_b, gamma, ccm) and
// is part of the determinism contract.
DegradationParams sample_params(StreamRng& rng, const ParamRanges& ranges, const CcmSet& ccms,
                                CcmMode ccm_mode);

// Multiply every value by k. k must lie in [0.01, 1].
PlanarImage attenuate(const PlanarImage& img, double k);

// Half-width of the quantization noise interval for the given mode.
double quant_halfwidth(int bits, QuantMode mode);

// In-place kernels over raw value buffers; the Bayer-variant pipeline uses
// these directly on a single plane.
void attenuate_values(std::span<double> v, double k);
void add_shot_read_noise_values(std::span<double> v, double delta_s, double delta_r,
                                StreamRng& rng);
void add_quantization_noise_values(std::span<double> v, int bits, QuantMode mode, StreamRng& rng);

// y = v + N(0, delta_r^2 + delta_s * max(v, 0)) per value, where v is the
// already-attenuated linear signal. One normal draw is consumed per value
// regardless of the noise magnitudes.
PlanarImage add_shot_read_noise(const PlanarImage& attenuated, const DegradationParams& p,
                                StreamRng& rng);

// Adds i.i.d. uniform noise on [-h, +h] with h = quant_halfwidth(bits, mode).
PlanarImage add_quantization_noise(const PlanarImage& img, int bits, QuantMode mode,
                                   StreamRng& rng);

}  // namespace lowlight
