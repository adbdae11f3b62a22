#pragma once

#include <cstddef>
#include <vector>

namespace lowlight {

// Color state a buffer is currently in. The pipeline drivers assert the
// expected tag sequence between stages.
enum class ColorState { SrgbEncoded, LinearCamera, LinearSrgb };

const char* to_string(ColorState s);

inline bool is_linear(ColorState s) { return s != ColorState::SrgbEncoded; }

// Planar RGB image: three full planes, R then G then B, each row-major.
// Values are nominally in [0,1]; linear-domain stages may carry values
// outside that range until the final encode clips them.
struct PlanarImage {
  int width = 0;
  int height = 0;
  ColorState state = ColorState::SrgbEncoded;
  std::vector<double> data;

  PlanarImage() = default;
  PlanarImage(int w, int h, ColorState s);

  static PlanarImage constant(int w, int h, double r, double g, double b, ColorState s);

  size_t plane_size() const { return size_t(width) * size_t(height); }
  size_t value_count() const { return data.size(); }

  double& at(int c, int y, int x) { return data[size_t(c) * plane_size() + size_t(y) * width + x]; }
  double at(int c, int y, int x) const { return data[size_t(c) * plane_size() + size_t(y) * width + x]; }

  bool same_shape(const PlanarImage& o) const { return width == o.width && height == o.height; }
};

// Throws ImageError when any stored value is not finite.
void require_finite(const PlanarImage& img, const char* where);

// Mean over all values of all three channels.
double mean_intensity(const PlanarImage& img);

// Clamp every value to [0,1] in place; returns the number of values clipped.
long clip01(PlanarImage& img);

// Largest |a - b| over all values; images must share shape.
double max_abs_diff(const PlanarImage& a, const PlanarImage& b);

}  // namespace lowlight
