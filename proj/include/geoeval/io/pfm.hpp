#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "geoeval/error.hpp"
#include "geoeval/image.hpp"

namespace geoeval::io {

static_assert(std::endian::native == std::endian::little, "PFM codec assumes a little-endian host");

/// Raw single-channel float image exactly as stored.
struct PfmImage {
  int width = 0;
  int height = 0;
  std::vector<float> data;  ///< row-major, top row first

  friend bool operator==(const PfmImage&, const PfmImage&) = default;
};

namespace detail {

inline std::string read_token(std::istream& in) {
  std::string tok;
  char c = 0;
  while (in.get(c) && std::isspace(static_cast<unsigned char>(c))) {
  }
  if (!in) return tok;
  tok.push_back(c);
  while (in.get(c) && !std::isspace(static_cast<unsigned char>(c))) tok.push_back(c);
  return tok;  // the single whitespace after the token has been consumed
}

}  // namespace detail

/// Grayscale "Pf" only; negative scale (little-endian) only.
inline PfmImage decode_pfm(std::istream& in) {
  const std::string magic = detail::read_token(in);
  if (magic == "PF") throw ParseError("PFM: colour (PF) variant is not supported");
  if (magic != "Pf") throw ParseError("PFM: bad magic '" + magic + "'");
  PfmImage img;
  try {
    img.width = std::stoi(detail::read_token(in));
    img.height = std::stoi(detail::read_token(in));
  } catch (const std::exception&) {
    throw ParseError("PFM: malformed dimensions");
  }
  if (img.width <= 0 || img.height <= 0) throw ParseError("PFM: non-positive dimensions");
  double scale = 0.0;
  try {
    scale = std::stod(detail::read_token(in));
  } catch (const std::exception&) {
    throw ParseError("PFM: malformed scale");
  }
  if (!(scale < 0.0)) throw ParseError("PFM: unsupported endianness (big-endian scale)");

  const auto n = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
  std::vector<float> raw(n);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n * sizeof(float)));
  if (static_cast<std::size_t>(in.gcount()) != n * sizeof(float)) {
    throw ParseError("PFM: truncated payload");
  }
  img.data.resize(n);
  const auto w = static_cast<std::size_t>(img.width);
  for (std::size_t row = 0; row < static_cast<std::size_t>(img.height); ++row) {
    const std::size_t src = (static_cast<std::size_t>(img.height) - 1 - row) * w;
    std::memcpy(img.data.data() + row * w, raw.data() + src, w * sizeof(float));
  }
  return img;
}

inline void encode_pfm(std::ostream& out, const PfmImage& img) {
  if (img.width <= 0 || img.height <= 0 ||
      img.data.size() != static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height)) {
    throw InvalidArgument("PFM: inconsistent image dimensions");
  }
  out << "Pf\n" << img.width << ' ' << img.height << "\n-1\n";
  const auto w = static_cast<std::size_t>(img.width);
  for (std::size_t row = static_cast<std::size_t>(img.height); row-- > 0;) {
    out.write(reinterpret_cast<const char*>(img.data.data() + row * w),
              static_cast<std::streamsize>(w * sizeof(float)));
  }
}

inline PfmImage read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return decode_pfm(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

inline void write_pfm(const std::filesystem::path& path, const PfmImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  encode_pfm(out, img);
  if (!out) throw DataError("failed writing " + path.string());
}

/// NaN (and any non-finite or non-positive value) becomes an invalid pixel.
inline DepthFrame to_depth_frame(const PfmImage& img) {
  Image<double> depth(img.width, img.height);
  for (std::size_t i = 0; i < img.data.size(); ++i) depth[i] = static_cast<double>(img.data[i]);
  return DepthFrame::from_depth(std::move(depth));
}

/// Invalid pixels are written as NaN.
inline PfmImage from_depth_frame(const DepthFrame& frame) {
  frame.validate();
  PfmImage img{frame.width(), frame.height(), std::vector<float>(frame.depth.size())};
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    img.data[i] = frame.valid(i) ? static_cast<float>(frame.depth[i])
                                 : std::numeric_limits<float>::quiet_NaN();
  }
  return img;
}

inline DepthFrame read_depth(const std::filesystem::path& path) { return to_depth_frame(read_pfm(path)); }

inline void write_depth(const std::filesystem::path& path, const DepthFrame& frame) {
  write_pfm(path, from_depth_frame(frame));
}

}  // namespace geoeval::io
