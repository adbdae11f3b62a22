#include "lowlight/image.hpp"

#include "lowlight/errors.hpp"

#include <cmath>
#include <string>

namespace lowlight {

const char* to_string(ColorState s) {
  switch (s) {
    case ColorState::SrgbEncoded: return "srgb_encoded";
    case ColorState::LinearCamera: return "linear_camera";
    case ColorState::LinearSrgb: return "linear_srgb";
  }
  return "?";
}

PlanarImage::PlanarImage(int w, int h, ColorState s) : width(w), height(h), state(s) {
  if (w <= 0 || h <= 0) throw ImageError("PlanarImage: dimensions must be positive");
  data.assign(size_t(w) * size_t(h) * 3, 0.0);
}

PlanarImage PlanarImage::constant(int w, int h, double r, double g, double b, ColorState s) {
  PlanarImage img(w, h, s);
  const size_t n = img.plane_size();
  for (size_t i = 0; i < n; ++i) img.data[i] = r;
  for (size_t i = 0; i < n; ++i) img.data[n + i] = g;
  for (size_t i = 0; i < n; ++i) img.data[2 * n + i] = b;
  return img;
}

void require_finite(const PlanarImage& img, const char* where) {
  for (double v : img.data) {
    if (!std::isfinite(v))
      throw ImageError(std::string(where) + ": image contains a non-finite value");
  }
}

double mean_intensity(const PlanarImage& img) {
  if (img.data.empty()) return 0.0;
  double sum = 0.0;
  for (double v : img.data) sum += v;
  return sum / double(img.data.size());
}

long clip01(PlanarImage& img) {
  long clipped = 0;
  for (double& v : img.data) {
    if (v < 0.0) {
      v = 0.0;
      ++clipped;
    } else if (v > 1.0) {
      v = 1.0;
      ++clipped;
    }
  }
  return clipped;
}

double max_abs_diff(const PlanarImage& a, const PlanarImage& b) {
  if (!a.same_shape(b)) throw ImageError("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::fabs(a.data[i] - b.data[i]));
  return m;
}

}  // namespace lowlight
