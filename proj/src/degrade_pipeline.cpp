#include "lowlight/degrade_pipeline.hpp"

#include "lowlight/errors.hpp"

namespace lowlight {

namespace {

void push_state(std::vector<ColorState>* trace, const PlanarImage& img) {
  if (trace) trace->push_back(img.state);
}

}  // namespace

PlanarImage unprocess(const PlanarImage& srgb, const DegradationParams& p, const CcmSet& ccms,
                      long* tone_clamped, std::vector<ColorState>* trace) {
  if (srgb.state != ColorState::SrgbEncoded)
    throw ImageError("unprocess: input must be sRGB encoded");
  push_state(trace, srgb);
  const Mat3 ccm = compose_selection(ccms, p.ccm);

  PlanarImage img = tone_invert(srgb, tone_clamped);
  push_state(trace, img);
  img = gamma_invert(img, p.gamma_params());
  push_state(trace, img);
  img = apply_ccm(img, ccm.inverse());
  push_state(trace, img);
  img = white_balance(img, 1.0 / p.g_r, 1.0 / p.g_b);
  push_state(trace, img);
  return img;
}

PlanarImage reprocess(const PlanarImage& linear_camera, const DegradationParams& p,
                      const CcmSet& ccms, const PipelineOptions& opt, StreamRng& noise_rng,
                      long* clipped, long* tone_clamped, std::vector<ColorState>* trace) {
  if (linear_camera.state != ColorState::LinearCamera)
    throw ImageError("reprocess: input must be in the linear camera state");
  const Mat3 ccm = compose_selection(ccms, p.ccm);

  PlanarImage img = linear_camera;
  if (opt.quant_enabled)
    img = add_quantization_noise(img, p.bits, opt.quant_mode, noise_rng);
  push_state(trace, img);
  img = white_balance(img, p.g_r, p.g_b);
  push_state(trace, img);
  img = apply_ccm(img, ccm);
  push_state(trace, img);
  img = gamma_correct(img, p.gamma_params());
  push_state(trace, img);
  if (opt.tone_remap) {
    img = tone_map(img, tone_clamped);
    push_state(trace, img);
  }
  const long n = clip01(img);
  if (clipped) *clipped += n;
  return img;
}

DegradeOutput degrade_full(const PlanarImage& srgb, const DegradationParams& p,
                           const PipelineOptions& opt, const CcmSet& ccms,
                           const ParamRanges& ranges, StreamRng& noise_rng,
                           std::vector<ColorState>* trace) {
  DegradeOutput out;
  out.record.method = SynthMethod::Ours;
  out.record.params = p;
  out.record.options = opt;
  out.record.normalized_targets = normalize_targets(p, ranges);

  PlanarImage img = unprocess(srgb, p, ccms, &out.record.tone_clamped, trace);
  img = attenuate(img, p.k);
  img = add_shot_read_noise(img, p, noise_rng);
  out.image = reprocess(img, p, ccms, opt, noise_rng, &out.record.clipped_pixels,
                        &out.record.tone_clamped, trace);
  return out;
}

}  // namespace lowlight
