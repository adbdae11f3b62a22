#include "lowlight/image_io.hpp"

#include "lowlight/errors.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

namespace lowlight {

namespace {

std::string lower_ext(const std::filesystem::path& path) {
  std::string e = path.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e;
}

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

PlanarImage read_png(const std::filesystem::path& path, std::string* warning) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("read_image: cannot open " + path.string());

  png_byte header[8];
  if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8))
    throw IoError("read_image: " + path.string() + " is not a PNG file");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("read_image: libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("read_image: libpng init failed");
  }

  std::vector<uint8_t> interleaved;
  int width = 0, height = 0, channels = 0;
  bool gray = false;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("read_image: libpng failed while decoding " + path.string());
  }

  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  if (bit_depth == 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ImageError("read_image: " + path.string() +
                     ": 16-bit PNG input is not supported (8-bit only)");
  }

  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  gray = color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA;

  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  width = int(png_get_image_width(png, info));
  height = int(png_get_image_height(png, info));
  channels = int(png_get_channels(png, info));

  interleaved.resize(size_t(width) * height * channels);
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y)
    rows[y] = interleaved.data() + size_t(y) * width * channels;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  if (gray && warning)
    *warning = path.filename().string() + ": grayscale input replicated to 3 channels";

  PlanarImage img(width, height, ColorState::SrgbEncoded);
  const size_t n = img.plane_size();
  for (size_t i = 0; i < n; ++i) {
    const uint8_t* px = interleaved.data() + i * channels;
    uint8_t r, g, b;
    if (channels >= 3) {
      r = px[0];
      g = px[1];
      b = px[2];
    } else {
      r = g = b = px[0];  // grayscale (the second channel, if any, is alpha)
    }
    img.data[i] = r / 255.0;
    img.data[n + i] = g / 255.0;
    img.data[2 * n + i] = b / 255.0;
  }
  return img;
}

PlanarImage read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_image: cannot open " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P6")
    throw ImageError("read_image: " + path.string() + ": only binary PPM (P6) is supported");
  auto next_token = [&in, &path]() {
    // Skip whitespace and '#' comment lines.
    for (;;) {
      int c = in.peek();
      if (c == '#') {
        std::string line;
        std::getline(in, line);
      } else if (std::isspace(c)) {
        in.get();
      } else {
        break;
      }
      if (!in) throw ImageError("read_image: truncated PPM header in " + path.string());
    }
    long v;
    in >> v;
    if (!in) throw ImageError("read_image: malformed PPM header in " + path.string());
    return v;
  };
  const long w = next_token();
  const long h = next_token();
  const long maxval = next_token();
  if (w <= 0 || h <= 0) throw ImageError("read_image: bad PPM dimensions in " + path.string());
  if (maxval != 255)
    throw ImageError("read_image: " + path.string() + ": PPM maxval must be 255 (8-bit only)");
  in.get();  // single whitespace after header
  std::vector<uint8_t> buf(size_t(w) * h * 3);
  in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
  if (size_t(in.gcount()) != buf.size())
    throw ImageError("read_image: truncated PPM pixel data in " + path.string());
  return from_bytes8(int(w), int(h), buf, ColorState::SrgbEncoded);
}

void write_png(const PlanarImage& img, const std::filesystem::path& path) {
  const std::vector<uint8_t> bytes = quantize8(img);
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("write_image: cannot open " + path.string() + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("write_image: libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("write_image: libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("write_image: libpng failed while encoding " + path.string());
  }
  png_init_io(png, fp.get());
  // Fixed encoder settings keep output bytes reproducible.
  png_set_compression_level(png, 6);
  png_set_filter(png, 0, PNG_FILTER_NONE);
  png_set_IHDR(png, info, png_uint_32(img.width), png_uint_32(img.height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y)
    rows[y] = const_cast<png_bytep>(bytes.data() + size_t(y) * img.width * 3);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_ppm(const PlanarImage& img, const std::filesystem::path& path) {
  const std::vector<uint8_t> bytes = quantize8(img);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("write_image: cannot open " + path.string() + " for writing");
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) throw IoError("write_image: failed writing " + path.string());
}

}  // namespace

std::vector<uint8_t> quantize8(const PlanarImage& img) {
  if (img.width <= 0 || img.height <= 0) throw ImageError("quantize8: empty image");
  const size_t n = img.plane_size();
  std::vector<uint8_t> out(n * 3);
  for (size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      double v = img.data[size_t(c) * n + i];
      v = std::clamp(v, 0.0, 1.0) * 255.0;
      // nearbyint under the default FP environment rounds half to even.
      out[i * 3 + c] = uint8_t(std::nearbyint(v));
    }
  }
  return out;
}

PlanarImage from_bytes8(int width, int height, std::span<const uint8_t> rgb, ColorState state) {
  if (rgb.size() != size_t(width) * height * 3)
    throw ImageError("from_bytes8: buffer size mismatch");
  PlanarImage img(width, height, state);
  const size_t n = img.plane_size();
  for (size_t i = 0; i < n; ++i) {
    img.data[i] = rgb[i * 3 + 0] / 255.0;
    img.data[n + i] = rgb[i * 3 + 1] / 255.0;
    img.data[2 * n + i] = rgb[i * 3 + 2] / 255.0;
  }
  return img;
}

bool is_supported_image(const std::filesystem::path& path) {
  const std::string e = lower_ext(path);
  return e == ".png" || e == ".ppm";
}

PlanarImage read_image(const std::filesystem::path& path, std::string* warning) {
  const std::string e = lower_ext(path);
  if (e == ".png") return read_png(path, warning);
  if (e == ".ppm") return read_ppm(path);
  throw ImageError("read_image: unsupported format '" + e + "' (PNG and PPM only)");
}

void write_image(const PlanarImage& img, const std::filesystem::path& path) {
  const std::string e = lower_ext(path);
  if (e == ".png") {
    write_png(img, path);
  } else if (e == ".ppm") {
    write_ppm(img, path);
  } else {
    throw ImageError("write_image: unsupported format '" + e + "' (PNG and PPM only)");
  }
}

}  // namespace lowlight
