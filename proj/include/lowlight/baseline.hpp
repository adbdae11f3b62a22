#pragma once

#include "lowlight/degrade_pipeline.hpp"

#include <vector>

namespace lowlight {

// Single-channel RGGB Bayer plane: R at (even,even), G at (even,odd) and
// (odd,even), B at (odd,odd).
struct BayerPlane {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  double& at(int y, int x) { return data[size_t(y) * width + x]; }
  double at(int y, int x) const { return data[size_t(y) * width + x]; }
};

// Global multiply by the illumination value L (the attenuation law applied
// to the display-referred image).
PlanarImage retinex_degrade(const PlanarImage& img, double L);

// Global multiply by k; contract identical to retinex_degrade.
PlanarImage linear_scale_degrade(const PlanarImage& img, double k);

enum class BaselineNoise { None, Poisson, GaussianPoisson };

// Per-pixel x^gamma followed by the selected noise (Poisson(P*x)/P, plus
// zero-mean Gaussian in the mixed model), then a clip to [0,1].
PlanarImage gamma_noise_degrade(const PlanarImage& img, double gamma, BaselineNoise noise,
                                double poisson_scale, double gaussian_std, StreamRng& rng);

// RGGB subsampling; requires even dimensions.
BayerPlane mosaic(const PlanarImage& img);

// Bilinear per-channel interpolation with replicated borders.
PlanarImage demosaic(const BayerPlane& plane, ColorState state);

// Apply white-balance gains on the Bayer plane at the matching sites.
void white_balance_bayer(BayerPlane& plane, double g_r, double g_b);

// Full pipeline variant with mosaic inserted after the inverse white
// balance and demosaic after the forward white balance; corruption happens
// on the Bayer plane.
DegradeOutput degrade_with_mosaic(const PlanarImage& srgb, const DegradationParams& p,
                                  const PipelineOptions& opt, const CcmSet& ccms,
                                  const ParamRanges& ranges, StreamRng& noise_rng);

}  // namespace lowlight
