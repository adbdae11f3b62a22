#pragma once

#include "lowlight/image.hpp"
#include "lowlight/options.hpp"
#include "lowlight/rng.hpp"

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace lowlight {

// Row-major 3x3 matrix with just enough linear algebra for CCM handling.
struct Mat3 {
  std::array<double, 9> m{};

  static Mat3 identity();
  static Mat3 diag(double a, double b, double c);

  double det() const;
  Mat3 inverse() const;  // throws ParamError when |det| < 1e-12
  Mat3 operator*(const Mat3& o) const;
  std::array<double, 3> apply(const std::array<double, 3>& v) const;
  double max_abs_diff(const Mat3& o) const;

  double& operator()(int r, int c) { return m[size_t(r) * 3 + c]; }
  double operator()(int r, int c) const { return m[size_t(r) * 3 + c]; }
};

struct CcmEntry {
  std::string name;
  Mat3 forward;  // cRGB -> sRGB
  Mat3 inverse;  // sRGB -> cRGB
};

// Named device matrices plus precomputed inverses.
struct CcmSet {
  std::vector<CcmEntry> entries;

  // The four matrices derived from the released data of the unprocessing
  // work (Sony A7R, Olympus E-M10, Sony RX100 IV, Huawei Nexus 6P). Rows
  // sum to 1, so white maps to white in both directions.
  static CcmSet builtin_defaults();

  // Invertibility and M * M^-1 ~ I within 1e-6 per entry.
  void validate() const;
};

struct GammaParams {
  double gamma = 2.2;
  double epsilon = 1e-5;
};

// Record of which matrix (or mixture) a degradation used, enough to
// recompose the exact matrix on replay.
struct CcmSelection {
  CcmMode mode = CcmMode::PickOne;
  int index = 0;                    // PickOne
  std::array<double, 4> weights{};  // ConvexMixture

  bool operator==(const CcmSelection&) const = default;
};

// Scalar transfer curves.
double gamma_correct_value(double x, const GammaParams& g);
double gamma_invert_value(double x, const GammaParams& g);
double tone_map_value(double x);
double tone_invert_value(double x);

// y = max(x, eps)^(1/gamma); requires a linear-state image, flips to encoded.
PlanarImage gamma_correct(const PlanarImage& img, const GammaParams& g);
// y = max(x, eps)^gamma; requires an encoded image, flips to linear sRGB.
PlanarImage gamma_invert(const PlanarImage& img, const GammaParams& g);

// Smoothstep 3x^2 - 2x^3 and its exact inverse on [0,1]. Inputs outside
// [0,1] are clamped first; *clamped (when given) accumulates how many.
PlanarImage tone_map(const PlanarImage& img, long* clamped = nullptr);
PlanarImage tone_invert(const PlanarImage& img, long* clamped = nullptr);

// R *= g_r, B *= g_b. Gains must be positive. State is unchanged; pass
// clip_display=true to clamp the result to [0,1].
PlanarImage white_balance(const PlanarImage& img, double g_r, double g_b, bool clip_display = false);

// Per-pixel matrix product. Requires a linear-state image and toggles
// LinearCamera <-> LinearSrgb.
PlanarImage apply_ccm(const PlanarImage& img, const Mat3& m);

// Compose the matrix described by a selection record.
Mat3 compose_selection(const CcmSet& set, const CcmSelection& sel);

// Draw a selection per the mode (uniform pick or flat-Dirichlet mixture)
// and return the composed matrix together with the record.
std::pair<Mat3, CcmSelection> select_ccm(StreamRng& rng, const CcmSet& set, CcmMode mode);

}  // namespace lowlight
