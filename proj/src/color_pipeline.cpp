#include "lowlight/color_pipeline.hpp"

#include "lowlight/errors.hpp"

#include <algorithm>
#include <cmath>

namespace lowlight {

const char* to_string(QuantMode m) {
  return m == QuantMode::Literal ? "literal" : "bitdepth";
}

const char* to_string(CcmMode m) {
  return m == CcmMode::PickOne ? "pick" : "mix";
}

QuantMode quant_mode_from_string(const std::string& s) {
  if (s == "literal") return QuantMode::Literal;
  if (s == "bitdepth") return QuantMode::BitDepth;
  throw ConfigError("unknown quantization mode '" + s + "' (expected literal|bitdepth)");
}

CcmMode ccm_mode_from_string(const std::string& s) {
  if (s == "pick") return CcmMode::PickOne;
  if (s == "mix") return CcmMode::ConvexMixture;
  throw ConfigError("unknown ccm mode '" + s + "' (expected pick|mix)");
}

Mat3 Mat3::identity() {
  Mat3 r;
  r.m = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  return r;
}

Mat3 Mat3::diag(double a, double b, double c) {
  Mat3 r;
  r.m = {a, 0, 0, 0, b, 0, 0, 0, c};
  return r;
}

double Mat3::det() const {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

Mat3 Mat3::inverse() const {
  const double d = det();
  if (std::fabs(d) < 1e-12) throw ParamError("Mat3::inverse: singular matrix");
  const double inv = 1.0 / d;
  Mat3 r;
  r.m[0] = (m[4] * m[8] - m[5] * m[7]) * inv;
  r.m[1] = (m[2] * m[7] - m[1] * m[8]) * inv;
  r.m[2] = (m[1] * m[5] - m[2] * m[4]) * inv;
  r.m[3] = (m[5] * m[6] - m[3] * m[8]) * inv;
  r.m[4] = (m[0] * m[8] - m[2] * m[6]) * inv;
  r.m[5] = (m[2] * m[3] - m[0] * m[5]) * inv;
  r.m[6] = (m[3] * m[7] - m[4] * m[6]) * inv;
  r.m[7] = (m[1] * m[6] - m[0] * m[7]) * inv;
  r.m[8] = (m[0] * m[4] - m[1] * m[3]) * inv;
  return r;
}

Mat3 Mat3::operator*(const Mat3& o) const {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
      r(i, j) = s;
    }
  return r;
}

std::array<double, 3> Mat3::apply(const std::array<double, 3>& v) const {
  return {m[0] * v[0] + m[1] * v[1] + m[2] * v[2],
          m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
          m[6] * v[0] + m[7] * v[1] + m[8] * v[2]};
}

double Mat3::max_abs_diff(const Mat3& o) const {
  double r = 0.0;
  for (int i = 0; i < 9; ++i) r = std::max(r, std::fabs(m[i] - o.m[i]));
  return r;
}

CcmSet CcmSet::builtin_defaults() {
  // cam2rgb = inverse(row_normalized(xyz2cam * rgb2xyz)) for the four
  // devices of the released unprocessing data.
  CcmSet set;
  set.entries.resize(4);
  set.entries[0].name = "Sony A7R";
  set.entries[0].forward.m = {1.2622718802, -0.4579576755, 0.1956857954,
                              -0.1505004795, 1.1334671964, 0.0170332831,
                              -0.0106435620, -0.3623453734, 1.3729889353};
  set.entries[1].name = "Olympus E-M10";
  set.entries[1].forward.m = {2.1207746639, -0.9673739964, -0.1534006675,
                              -0.1257417800, 1.5861534939, -0.4604117139,
                              0.0498788973, -0.4415629198, 1.3916840225};
  set.entries[2].name = "Sony RX100 IV";
  set.entries[2].forward.m = {1.7054886393, -0.5323869706, -0.1731016687,
                              -0.2921513341, 1.8168041034, -0.5246527693,
                              0.0322175529, -0.4933459462, 1.4611283934};
  set.entries[3].name = "Huawei Nexus 6P";
  set.entries[3].forward.m = {1.6342426523, -0.4373281606, -0.1969144917,
                              -0.1838862188, 1.5024065950, -0.3185203762,
                              0.0407863528, -0.4297072359, 1.3889208831};
  for (auto& e : set.entries) e.inverse = e.forward.inverse();
  set.validate();
  return set;
}

void CcmSet::validate() const {
  if (entries.empty()) throw ConfigError("CcmSet: no matrices loaded");
  const Mat3 id = Mat3::identity();
  for (const auto& e : entries) {
    if (std::fabs(e.forward.det()) < 1e-12)
      throw ConfigError("CcmSet: matrix '" + e.name + "' is singular");
    const Mat3 prod = e.forward * e.inverse;
    if (prod.max_abs_diff(id) >= 1e-6)
      throw ConfigError("CcmSet: matrix '" + e.name + "' inverse check failed");
  }
}

double gamma_correct_value(double x, const GammaParams& g) {
  return std::pow(std::max(x, g.epsilon), 1.0 / g.gamma);
}

double gamma_invert_value(double x, const GammaParams& g) {
  return std::pow(std::max(x, g.epsilon), g.gamma);
}

double tone_map_value(double x) {
  return 3.0 * x * x - 2.0 * x * x * x;
}

double tone_invert_value(double x) {
  return 0.5 - std::sin(std::asin(1.0 - 2.0 * x) / 3.0);
}

namespace {

void require_linear_state(const PlanarImage& img, const char* where) {
  if (!is_linear(img.state))
    throw ImageError(std::string(where) + ": expected a linear-state image, got " +
                     to_string(img.state));
}

void require_encoded_state(const PlanarImage& img, const char* where) {
  if (img.state != ColorState::SrgbEncoded)
    throw ImageError(std::string(where) + ": expected an sRGB-encoded image, got " +
                     to_string(img.state));
}

PlanarImage tone_apply(const PlanarImage& img, long* clamped, double (*fn)(double),
                       const char* where) {
  require_finite(img, where);
  require_encoded_state(img, where);
  PlanarImage out = img;
  long n = 0;
  for (double& v : out.data) {
    if (v < 0.0 || v > 1.0) {
      v = std::clamp(v, 0.0, 1.0);
      ++n;
    }
    v = fn(v);
  }
  if (clamped) *clamped += n;
  return out;
}

}  // namespace

PlanarImage gamma_correct(const PlanarImage& img, const GammaParams& g) {
  require_finite(img, "gamma_correct");
  require_linear_state(img, "gamma_correct");
  if (!(g.gamma > 0.0) || !(g.epsilon > 0.0))
    throw ParamError("gamma_correct: gamma and epsilon must be positive");
  PlanarImage out = img;
  const double e = 1.0 / g.gamma;
  for (double& v : out.data) v = std::pow(std::max(v, g.epsilon), e);
  out.state = ColorState::SrgbEncoded;
  return out;
}

PlanarImage gamma_invert(const PlanarImage& img, const GammaParams& g) {
  require_finite(img, "gamma_invert");
  require_encoded_state(img, "gamma_invert");
  if (!(g.gamma > 0.0) || !(g.epsilon > 0.0))
    throw ParamError("gamma_invert: gamma and epsilon must be positive");
  PlanarImage out = img;
  for (double& v : out.data) v = std::pow(std::max(v, g.epsilon), g.gamma);
  out.state = ColorState::LinearSrgb;
  return out;
}

PlanarImage tone_map(const PlanarImage& img, long* clamped) {
  return tone_apply(img, clamped, &tone_map_value, "tone_map");
}

PlanarImage tone_invert(const PlanarImage& img, long* clamped) {
  return tone_apply(img, clamped, &tone_invert_value, "tone_invert");
}

PlanarImage white_balance(const PlanarImage& img, double g_r, double g_b, bool clip_display) {
  if (!(g_r > 0.0) || !(g_b > 0.0))
    throw ParamError("white_balance: gains must be positive");
  require_finite(img, "white_balance");
  PlanarImage out = img;
  const size_t n = out.plane_size();
  for (size_t i = 0; i < n; ++i) out.data[i] *= g_r;
  for (size_t i = 0; i < n; ++i) out.data[2 * n + i] *= g_b;
  if (clip_display) clip01(out);
  return out;
}

PlanarImage apply_ccm(const PlanarImage& img, const Mat3& m) {
  if (std::fabs(m.det()) < 1e-12) throw ParamError("apply_ccm: singular matrix");
  require_finite(img, "apply_ccm");
  require_linear_state(img, "apply_ccm");
  PlanarImage out = img;
  const size_t n = out.plane_size();
  for (size_t i = 0; i < n; ++i) {
    const std::array<double, 3> v{img.data[i], img.data[n + i], img.data[2 * n + i]};
    const auto y = m.apply(v);
    out.data[i] = y[0];
    out.data[n + i] = y[1];
    out.data[2 * n + i] = y[2];
  }
  out.state = img.state == ColorState::LinearCamera ? ColorState::LinearSrgb
                                                    : ColorState::LinearCamera;
  return out;
}

Mat3 compose_selection(const CcmSet& set, const CcmSelection& sel) {
  if (set.entries.empty()) throw ConfigError("compose_selection: empty CcmSet");
  if (sel.mode == CcmMode::PickOne) {
    if (sel.index < 0 || size_t(sel.index) >= set.entries.size())
      throw ParamError("compose_selection: index out of range");
    return set.entries[sel.index].forward;
  }
  Mat3 r;
  r.m.fill(0.0);
  const size_t k = std::min<size_t>(sel.weights.size(), set.entries.size());
  for (size_t i = 0; i < k; ++i)
    for (int j = 0; j < 9; ++j) r.m[j] += sel.weights[i] * set.entries[i].forward.m[j];
  return r;
}

std::pair<Mat3, CcmSelection> select_ccm(StreamRng& rng, const CcmSet& set, CcmMode mode) {
  if (set.entries.empty()) throw ConfigError("select_ccm: empty CcmSet");
  CcmSelection sel;
  sel.mode = mode;
  if (mode == CcmMode::PickOne) {
    sel.index = int(rng.uniform_index(uint32_t(set.entries.size())));
  } else {
    sel.index = -1;
    sel.weights = rng.dirichlet4();
  }
  return {compose_selection(set, sel), sel};
}

}  // namespace lowlight
