#include "lowlight/synth.hpp"

#include "lowlight/errors.hpp"
#include "lowlight/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace lowlight {

PlanarImage make_test_image(int width, int height, StreamRng& rng) {
  PlanarImage img(width, height, ColorState::SrgbEncoded);

  // Shared luminance gradient plus a small per-channel cast.
  const double angle = rng.uniform(0.0, 2.0 * M_PI);
  const double gx = std::cos(angle), gy = std::sin(angle);
  const double base = rng.uniform(0.25, 0.6);
  const double amp = rng.uniform(0.1, 0.3);
  double cast[3];
  for (double& c : cast) c = rng.uniform(-0.08, 0.08);

  const double fx = rng.uniform(1.0, 3.0), fy = rng.uniform(1.0, 3.0);
  const double phase = rng.uniform(0.0, 2.0 * M_PI);

  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double u = (x + 0.5) / width, v = (y + 0.5) / height;
      const double ramp = base + amp * (gx * (u - 0.5) + gy * (v - 0.5));
      const double wave = 0.06 * std::sin(2.0 * M_PI * (fx * u + fy * v) + phase);
      for (int c = 0; c < 3; ++c) img.at(c, y, x) = ramp + wave + cast[c];
    }
  }

  // A few soft blobs with moderate saturation.
  const int blobs = 2 + int(rng.uniform_index(3));
  for (int bi = 0; bi < blobs; ++bi) {
    const double cx = rng.uniform(0.15, 0.85), cy = rng.uniform(0.15, 0.85);
    const double radius = rng.uniform(0.08, 0.25);
    const double lum = rng.uniform(-0.25, 0.3);
    double tint[3];
    for (double& t : tint) t = lum + rng.uniform(-0.1, 0.1);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double u = (x + 0.5) / width, v = (y + 0.5) / height;
        const double d2 = (u - cx) * (u - cx) + (v - cy) * (v - cy);
        const double w = std::exp(-d2 / (2.0 * radius * radius));
        for (int c = 0; c < 3; ++c) img.at(c, y, x) += w * tint[c];
      }
    }
  }

  // Mild per-pixel texture.
  for (double& val : img.data) val += rng.uniform(-0.01, 0.01);

  for (double& val : img.data) val = std::clamp(val, 0.02, 0.98);
  return img;
}

void write_test_corpus(const std::filesystem::path& dir, int count, int width, int height,
                       uint64_t seed) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw IoError("write_test_corpus: cannot create " + dir.string());
  for (int i = 0; i < count; ++i) {
    StreamRng rng(seed, {uint64_t(i)});
    const PlanarImage img = make_test_image(width, height, rng);
    char name[32];
    std::snprintf(name, sizeof name, "img_%03d.png", i);
    write_image(img, dir / name);
  }
}

}  // namespace lowlight
