#pragma once

#include "lowlight/image.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace lowlight {

// Reads an 8-bit PNG (RGB, RGBA with alpha dropped, palette expanded, or
// grayscale replicated to three channels with a warning) or a binary PPM
// (P6, maxval 255). 16-bit inputs are rejected. Values are scaled by 1/255
// and the image is tagged SrgbEncoded.
PlanarImage read_image(const std::filesystem::path& path, std::string* warning = nullptr);

// Writes PNG or PPM depending on the extension. Values are clamped to
// [0,1] and quantized with round-half-to-even so replay equality is well
// defined. The PNG encoder uses fixed settings (no ancillary chunks), so
// identical pixels produce identical bytes.
void write_image(const PlanarImage& img, const std::filesystem::path& path);

// Interleaved 8-bit RGB with round-half-to-even quantization.
std::vector<uint8_t> quantize8(const PlanarImage& img);

PlanarImage from_bytes8(int width, int height, std::span<const uint8_t> rgb, ColorState state);

bool is_supported_image(const std::filesystem::path& path);

}  // namespace lowlight
