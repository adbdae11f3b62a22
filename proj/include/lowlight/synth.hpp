#pragma once

#include "lowlight/image.hpp"
#include "lowlight/rng.hpp"

#include <filesystem>

namespace lowlight {

// Deterministic synthetic photo stand-in: low-frequency color gradients,
// a few soft shapes, mild texture. Values stay inside [0.02, 0.98] with
// moderate saturation so the inverse ISP behaves like it does on ordinary
// photographs.
PlanarImage make_test_image(int width, int height, StreamRng& rng);

// Writes `count` generated PNGs (img_000.png, ...) into dir.
void write_test_corpus(const std::filesystem::path& dir, int count, int width, int height,
                       uint64_t seed);

}  // namespace lowlight
