#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "geoeval/error.hpp"

namespace geoeval {

/// Dense row-major image, (x, y) = (column, row).
template <typename T>
class Image {
 public:
  Image() = default;
  Image(int width, int height, const T& fill = T{})
      : width_(width), height_(height), data_(checked_size(width, height), fill) {}

  [[nodiscard]] int width() const { return width_; }
  [[nodiscard]] int height() const { return height_; }
  [[nodiscard]] std::size_t size() const { return data_.size(); }
  [[nodiscard]] bool empty() const { return data_.empty(); }

  [[nodiscard]] T& at(int x, int y) { return data_[index(x, y)]; }
  [[nodiscard]] const T& at(int x, int y) const { return data_[index(x, y)]; }
  [[nodiscard]] T& operator[](std::size_t i) { return data_[i]; }
  [[nodiscard]] const T& operator[](std::size_t i) const { return data_[i]; }

  [[nodiscard]] bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  [[nodiscard]] std::vector<T>& data() { return data_; }
  [[nodiscard]] const std::vector<T>& data() const { return data_; }

  template <typename U>
  [[nodiscard]] bool same_shape(const Image<U>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  static std::size_t checked_size(int w, int h) {
    if (w < 0 || h < 0) throw InvalidArgument("image dimensions must be non-negative");
    return static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  }
  [[nodiscard]] std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using Mask = Image<std::uint8_t>;
/// RGB normalized to [0, 1].
using ColorImage = Image<std::array<double, 3>>;

/// Metric depth plus validity. Valid pixels are finite and strictly positive.
struct DepthFrame {
  Image<double> depth;
  Mask mask;

  DepthFrame() = default;
  DepthFrame(int width, int height, double fill = 0.0, bool valid = false)
      : depth(width, height, fill), mask(width, height, valid ? 1 : 0) {}

  /// Marks every finite, positive depth as valid.
  static DepthFrame from_depth(Image<double> depth) {
    DepthFrame f;
    f.mask = Mask(depth.width(), depth.height(), 0);
    for (std::size_t i = 0; i < depth.size(); ++i) {
      f.mask[i] = (std::isfinite(depth[i]) && depth[i] > 0.0) ? 1 : 0;
    }
    f.depth = std::move(depth);
    return f;
  }

  [[nodiscard]] int width() const { return depth.width(); }
  [[nodiscard]] int height() const { return depth.height(); }

  /// Mask set and depth usable.
  [[nodiscard]] bool valid(std::size_t i) const {
    return mask[i] != 0 && std::isfinite(depth[i]) && depth[i] > 0.0;
  }
  [[nodiscard]] bool valid(int x, int y) const {
    return valid(static_cast<std::size_t>(y) * static_cast<std::size_t>(width()) +
                 static_cast<std::size_t>(x));
  }

  [[nodiscard]] std::size_t valid_count() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < depth.size(); ++i) n += valid(i) ? 1 : 0;
    return n;
  }

  void validate() const {
    if (!depth.same_shape(mask)) throw InvalidArgument("depth and mask dimensions differ");
  }
};

inline std::string shape_string(int w, int h) {
  return std::to_string(w) + "x" + std::to_string(h);
}

}  // namespace geoeval
