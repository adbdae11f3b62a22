#include "lowlight/baseline.hpp"

#include "lowlight/errors.hpp"

#include <algorithm>
#include <cmath>

namespace lowlight {

namespace {

void require_scale(double v, const char* what) {
  if (!(v >= 0.01) || !(v <= 1.0))
    throw ParamError(std::string(what) + " must lie in [0.01, 1.0]");
}

}  // namespace

PlanarImage retinex_degrade(const PlanarImage& img, double L) {
  require_scale(L, "retinex_degrade: L");
  require_finite(img, "retinex_degrade");
  PlanarImage out = img;
  for (double& v : out.data) v *= L;
  return out;
}

PlanarImage linear_scale_degrade(const PlanarImage& img, double k) {
  require_scale(k, "linear_scale_degrade: k");
  require_finite(img, "linear_scale_degrade");
  PlanarImage out = img;
  for (double& v : out.data) v *= k;
  return out;
}

PlanarImage gamma_noise_degrade(const PlanarImage& img, double gamma, BaselineNoise noise,
                                double poisson_scale, double gaussian_std, StreamRng& rng) {
  if (!(gamma >= 2.0) || !(gamma <= 3.5))
    throw ParamError("gamma_noise_degrade: gamma must lie in [2.0, 3.5]");
  if (noise != BaselineNoise::None && !(poisson_scale > 0.0))
    throw ParamError("gamma_noise_degrade: poisson_scale must be positive");
  if (noise == BaselineNoise::GaussianPoisson && gaussian_std < 0.0)
    throw ParamError("gamma_noise_degrade: gaussian_std must be nonnegative");
  require_finite(img, "gamma_noise_degrade");

  PlanarImage out = img;
  for (double& v : out.data) {
    double y = std::pow(std::max(v, 0.0), gamma);
    if (noise != BaselineNoise::None) {
      y = double(rng.poisson(poisson_scale * y)) / poisson_scale;
      if (noise == BaselineNoise::GaussianPoisson) y += gaussian_std * rng.normal();
    }
    v = y;
  }
  clip01(out);
  return out;
}

BayerPlane mosaic(const PlanarImage& img) {
  if (img.width % 2 != 0 || img.height % 2 != 0)
    throw ImageError("mosaic: image dimensions must be even");
  BayerPlane plane;
  plane.width = img.width;
  plane.height = img.height;
  plane.data.resize(img.plane_size());
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      int c;
      if (y % 2 == 0) {
        c = (x % 2 == 0) ? 0 : 1;  // R G
      } else {
        c = (x % 2 == 0) ? 1 : 2;  // G B
      }
      plane.at(y, x) = img.at(c, y, x);
    }
  }
  return plane;
}

namespace {

// Out-of-range neighbor indices step back by two pixels so the reflected
// sample stays on a site of the same color.
inline int reflect_parity(int v, int size) {
  if (v < 0) return v + 2;
  if (v >= size) return v - 2;
  return v;
}

double avg_at(const BayerPlane& p, int y, int x, std::initializer_list<std::pair<int, int>> offs) {
  double s = 0.0;
  for (const auto& [dy, dx] : offs)
    s += p.at(reflect_parity(y + dy, p.height), reflect_parity(x + dx, p.width));
  return s / double(offs.size());
}

}  // namespace

PlanarImage demosaic(const BayerPlane& plane, ColorState state) {
  if (plane.width % 2 != 0 || plane.height % 2 != 0)
    throw ImageError("demosaic: plane dimensions must be even");
  PlanarImage img(plane.width, plane.height, state);
  for (int y = 0; y < plane.height; ++y) {
    for (int x = 0; x < plane.width; ++x) {
      const bool ey = y % 2 == 0, ex = x % 2 == 0;
      double r, g, b;
      if (ey && ex) {  // R site
        r = plane.at(y, x);
        g = avg_at(plane, y, x, {{0, -1}, {0, 1}, {-1, 0}, {1, 0}});
        b = avg_at(plane, y, x, {{-1, -1}, {-1, 1}, {1, -1}, {1, 1}});
      } else if (!ey && !ex) {  // B site
        b = plane.at(y, x);
        g = avg_at(plane, y, x, {{0, -1}, {0, 1}, {-1, 0}, {1, 0}});
        r = avg_at(plane, y, x, {{-1, -1}, {-1, 1}, {1, -1}, {1, 1}});
      } else if (ey) {  // G site on an R row
        g = plane.at(y, x);
        r = avg_at(plane, y, x, {{0, -1}, {0, 1}});
        b = avg_at(plane, y, x, {{-1, 0}, {1, 0}});
      } else {  // G site on a B row
        g = plane.at(y, x);
        r = avg_at(plane, y, x, {{-1, 0}, {1, 0}});
        b = avg_at(plane, y, x, {{0, -1}, {0, 1}});
      }
      img.at(0, y, x) = r;
      img.at(1, y, x) = g;
      img.at(2, y, x) = b;
    }
  }
  return img;
}

void white_balance_bayer(BayerPlane& plane, double g_r, double g_b) {
  if (!(g_r > 0.0) || !(g_b > 0.0))
    throw ParamError("white_balance_bayer: gains must be positive");
  for (int y = 0; y < plane.height; ++y) {
    for (int x = 0; x < plane.width; ++x) {
      if (y % 2 == 0 && x % 2 == 0) {
        plane.at(y, x) *= g_r;
      } else if (y % 2 == 1 && x % 2 == 1) {
        plane.at(y, x) *= g_b;
      }
    }
  }
}

DegradeOutput degrade_with_mosaic(const PlanarImage& srgb, const DegradationParams& p,
                                  const PipelineOptions& opt, const CcmSet& ccms,
                                  const ParamRanges& ranges, StreamRng& noise_rng) {
  if (srgb.width % 2 != 0 || srgb.height % 2 != 0)
    throw ImageError("degrade_with_mosaic: image dimensions must be even");

  DegradeOutput out;
  out.record.method = SynthMethod::OursMosaic;
  out.record.params = p;
  out.record.options = opt;
  out.record.options.mosaic = true;
  out.record.normalized_targets = normalize_targets(p, ranges);

  PlanarImage img = unprocess(srgb, p, ccms, &out.record.tone_clamped);
  BayerPlane plane = mosaic(img);

  if (!(p.k >= 0.01) || !(p.k <= 1.0))
    throw ParamError("degrade_with_mosaic: k must lie in [0.01, 1.0]");
  attenuate_values(plane.data, p.k);
  add_shot_read_noise_values(plane.data, p.delta_s, p.delta_r, noise_rng);
  if (opt.quant_enabled)
    add_quantization_noise_values(plane.data, p.bits, opt.quant_mode, noise_rng);
  white_balance_bayer(plane, p.g_r, p.g_b);

  img = demosaic(plane, ColorState::LinearCamera);
  img = apply_ccm(img, compose_selection(ccms, p.ccm));
  img = gamma_correct(img, p.gamma_params());
  if (opt.tone_remap) img = tone_map(img, &out.record.tone_clamped);
  out.record.clipped_pixels = clip01(img);
  out.image = std::move(img);
  return out;
}

}  // namespace lowlight
