#pragma once

#include <png.h>

#include <filesystem>
#include <string>
#include <vector>

#include "geoeval/error.hpp"
#include "geoeval/image.hpp"

namespace geoeval::io {

/// 8-bit samples as decoded from a PNG, `channels` per pixel.
struct RawPng {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;
};

/// Decodes any PNG to 8-bit gray (`want_color` false) or RGB.
inline RawPng read_png(const std::filesystem::path& path, bool want_color) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw DataError("cannot read PNG " + path.string() + ": " + image.message);
  }
  image.format = want_color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  RawPng out;
  out.width = static_cast<int>(image.width);
  out.height = static_cast<int>(image.height);
  out.channels = want_color ? 3 : 1;
  out.data.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.data.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw DataError("cannot decode PNG " + path.string() + ": " + msg);
  }
  return out;
}

inline void write_png(const std::filesystem::path& path, const RawPng& img) {
  if (img.channels != 1 && img.channels != 3) throw InvalidArgument("PNG: 1 or 3 channels only");
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = img.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, img.data.data(), 0, nullptr)) {
    throw DataError("cannot write PNG " + path.string() + ": " + image.message);
  }
}

/// RGB scaled to [0, 1] by 1/255.
inline ColorImage read_color_image(const std::filesystem::path& path) {
  const RawPng raw = read_png(path, true);
  ColorImage img(raw.width, raw.height);
  for (std::size_t i = 0; i < img.size(); ++i) {
    for (std::size_t c = 0; c < 3; ++c) img[i][c] = raw.data[3 * i + c] / 255.0;
  }
  return img;
}

/// Single-channel mask; non-zero samples are set.
inline Mask read_mask_image(const std::filesystem::path& path) {
  const RawPng raw = read_png(path, false);
  Mask m(raw.width, raw.height, 0);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = raw.data[i] ? 1 : 0;
  return m;
}

/// Set pixels written as 255.
inline void write_mask_image(const std::filesystem::path& path, const Mask& mask) {
  RawPng raw{mask.width(), mask.height(), 1, std::vector<std::uint8_t>(mask.size())};
  for (std::size_t i = 0; i < mask.size(); ++i) raw.data[i] = mask[i] ? 255 : 0;
  write_png(path, raw);
}

}  // namespace geoeval::io
