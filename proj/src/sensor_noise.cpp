#include "lowlight/sensor_noise.hpp"

#include "lowlight/errors.hpp"

#include <cmath>
#include <string>

namespace lowlight {

void ParamRanges::validate() const {
  auto well_ordered = [](const UniformRange& r, const char* name) {
    if (!(r.lo < r.hi))
      throw ConfigError(std::string("ParamRanges: ") + name + " bounds must satisfy lo < hi");
  };
  well_ordered(k_bounds, "k");
  well_ordered(log10_delta_s, "log10_delta_s");
  well_ordered(g_r, "g_r");
  well_ordered(g_b, "g_b");
  well_ordered(gamma, "gamma");
  // attenuate() enforces the calibrated-table domain, so the sampler must
  // stay inside it.
  if (k_bounds.lo < 0.01 || k_bounds.hi > 1.0)
    throw ConfigError("ParamRanges: k bounds must stay inside [0.01, 1.0]");
  if (!(k_std > 0.0)) throw ConfigError("ParamRanges: k std must be positive");
  if (!(read_law_std > 0.0)) throw ConfigError("ParamRanges: read-noise law std must be positive");
  if (!(g_r.lo > 0.0) || !(g_b.lo > 0.0))
    throw ConfigError("ParamRanges: white-balance gains must be positive");
  if (!(gamma.lo > 0.0)) throw ConfigError("ParamRanges: gamma must be positive");
  if (bit_choices.empty()) throw ConfigError("ParamRanges: bit_choices must not be empty");
  for (int b : bit_choices)
    if (b <= 0) throw ConfigError("ParamRanges: bit_choices entries must be positive");
  if (!(epsilon > 0.0)) throw ConfigError("ParamRanges: epsilon must be positive");
}

DegradationParams sample_params(StreamRng& rng, const ParamRanges& ranges, const CcmSet& ccms,
                                CcmMode ccm_mode) {
  ranges.validate();
  DegradationParams p;
  p.k = rng.truncated_normal(ranges.k_mean, ranges.k_std, ranges.k_bounds.lo, ranges.k_bounds.hi);
  const double log_ds = rng.uniform(ranges.log10_delta_s.lo, ranges.log10_delta_s.hi);
  p.delta_s = std::pow(10.0, log_ds);
  const double log_dr =
      rng.normal(ranges.read_law_slope * log_ds + ranges.read_law_intercept, ranges.read_law_std);
  p.delta_r = std::pow(10.0, log_dr);
  p.bits = ranges.bit_choices[rng.uniform_index(uint32_t(ranges.bit_choices.size()))];
  p.g_r = rng.uniform(ranges.g_r.lo, ranges.g_r.hi);
  p.g_b = rng.uniform(ranges.g_b.lo, ranges.g_b.hi);
  p.gamma = rng.uniform(ranges.gamma.lo, ranges.gamma.hi);
  p.epsilon = ranges.epsilon;
  p.ccm = select_ccm(rng, ccms, ccm_mode).second;
  return p;
}

PlanarImage attenuate(const PlanarImage& img, double k) {
  if (!(k >= 0.01) || !(k <= 1.0))
    throw ParamError("attenuate: k must lie in [0.01, 1.0]");
  require_finite(img, "attenuate");
  PlanarImage out = img;
  attenuate_values(out.data, k);
  return out;
}

void attenuate_values(std::span<double> v, double k) {
  for (double& x : v) x *= k;
}

double quant_halfwidth(int bits, QuantMode mode) {
  if (bits <= 0) throw ParamError("quantization: bits must be positive");
  if (mode == QuantMode::Literal) return 1.0 / (2.0 * double(bits));
  return std::ldexp(1.0, -(bits + 1));  // half of the 1/2^B step
}

void add_shot_read_noise_values(std::span<double> v, double delta_s, double delta_r,
                                StreamRng& rng) {
  if (delta_s < 0.0 || delta_r < 0.0)
    throw ParamError("shot/read noise: noise parameters must be nonnegative");
  for (double& x : v) {
    const double var = delta_r * delta_r + delta_s * std::max(x, 0.0);
    x += std::sqrt(var) * rng.normal();
  }
}

void add_quantization_noise_values(std::span<double> v, int bits, QuantMode mode,
                                   StreamRng& rng) {
  const double h = quant_halfwidth(bits, mode);
  for (double& x : v) x += rng.uniform(-h, h);
}

PlanarImage add_shot_read_noise(const PlanarImage& attenuated, const DegradationParams& p,
                                StreamRng& rng) {
  require_finite(attenuated, "add_shot_read_noise");
  PlanarImage out = attenuated;
  add_shot_read_noise_values(out.data, p.delta_s, p.delta_r, rng);
  return out;
}

PlanarImage add_quantization_noise(const PlanarImage& img, int bits, QuantMode mode,
                                   StreamRng& rng) {
  require_finite(img, "add_quantization_noise");
  PlanarImage out = img;
  add_quantization_noise_values(out.data, bits, mode, rng);
  return out;
}

}  // namespace lowlight
