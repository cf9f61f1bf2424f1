#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "geoeval/error.hpp"
#include "geoeval/image.hpp"

namespace geoeval {

enum class CleanStage { Range = 0, FlyingPoints, Bilateral, SmallComponents, Sky };
inline constexpr std::size_t kCleanStageCount = 5;

inline const char* to_string(CleanStage s) {
  switch (s) {
    case CleanStage::Range: return "range";
    case CleanStage::FlyingPoints: return "flying_points";
    case CleanStage::Bilateral: return "bilateral";
    case CleanStage::SmallComponents: return "small_components";
    case CleanStage::Sky: return "sky";
  }
  return "?";
}

struct CleanConfig {
  double d_min = 0.05;
  double d_max = 5.0;
  double flying_threshold = 0.1;  ///< relative gradient |∇D| / D
  int erosion_radius = 2;
  int bilateral_window = 5;
  double sigma_spatial = 2.0;  ///< pixels
  double sigma_color = 0.1;    ///< RGB in [0, 1]
  int min_component_area = 100;
  int connectivity = 4;

  void validate() const {
    if (!(d_min >= 0.0) || !(d_min < d_max)) throw InvalidArgument("need 0 <= d_min < d_max");
    if (!(flying_threshold > 0.0)) throw InvalidArgument("flying-point threshold must be positive");
    if (erosion_radius < 0) throw InvalidArgument("erosion radius must be non-negative");
    if (bilateral_window < 3 || bilateral_window % 2 == 0) {
      throw InvalidArgument("bilateral window must be odd and >= 3");
    }
    if (!(sigma_spatial > 0.0) || !(sigma_color > 0.0)) {
      throw InvalidArgument("bilateral sigmas must be positive");
    }
    if (min_component_area < 1) throw InvalidArgument("minimum component area must be >= 1");
    if (connectivity != 4 && connectivity != 8) throw InvalidArgument("connectivity must be 4 or 8");
  }
};

struct CleanResult {
  DepthFrame frame;
  /// Pixels each stage turned invalid.
  std::array<std::size_t, kCleanStageCount> invalidated{};

  [[nodiscard]] std::size_t count(CleanStage s) const {
    return invalidated[static_cast<std::size_t>(s)];
  }
};

namespace detail {

/// Validity mask normalised to the DepthFrame valid() predicate.
inline DepthFrame normalized(const DepthFrame& in) {
  in.validate();
  DepthFrame out = in;
  for (std::size_t i = 0; i < out.depth.size(); ++i) out.mask[i] = in.valid(i) ? 1 : 0;
  return out;
}

inline std::size_t count_dropped(const DepthFrame& before, const DepthFrame& after) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < before.mask.size(); ++i) n += (before.mask[i] && !after.mask[i]) ? 1 : 0;
  return n;
}

inline CleanResult finish(const DepthFrame& before, DepthFrame after, CleanStage stage) {
  CleanResult r;
  r.invalidated[static_cast<std::size_t>(stage)] = count_dropped(before, after);
  r.frame = std::move(after);
  return r;
}

}  // namespace detail

/// Stage 1: pixels outside [d_min, d_max] become invalid.
inline CleanResult clip_range(const DepthFrame& frame, double d_min, double d_max) {
  if (!(d_min < d_max)) throw InvalidArgument("need d_min < d_max");
  const DepthFrame in = detail::normalized(frame);
  DepthFrame out = in;
  for (std::size_t i = 0; i < out.depth.size(); ++i) {
    if (out.mask[i] && (out.depth[i] < d_min || out.depth[i] > d_max)) out.mask[i] = 0;
  }
  return detail::finish(in, std::move(out), CleanStage::Range);
}

/// Stage 2: flag pixels with |∇D| > threshold · D, using forward
/// differences between mutually valid neighbours only, then drop every
/// valid pixel within Chebyshev distance `erosion_radius` of a flag.
inline CleanResult remove_flying_points(const DepthFrame& frame, double threshold,
                                        int erosion_radius) {
  if (!(threshold > 0.0)) throw InvalidArgument("flying-point threshold must be positive");
  if (erosion_radius < 0) throw InvalidArgument("erosion radius must be non-negative");
  const DepthFrame in = detail::normalized(frame);
  const int w = in.width();
  const int h = in.height();

  Mask flagged(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!in.mask.at(x, y)) continue;
      const double d = in.depth.at(x, y);
      const double gx = (x + 1 < w && in.mask.at(x + 1, y)) ? in.depth.at(x + 1, y) - d : 0.0;
      const double gy = (y + 1 < h && in.mask.at(x, y + 1)) ? in.depth.at(x, y + 1) - d : 0.0;
      if (std::sqrt(gx * gx + gy * gy) > threshold * d) flagged.at(x, y) = 1;
    }
  }

  DepthFrame out = in;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!flagged.at(x, y)) continue;
      for (int dy = -erosion_radius; dy <= erosion_radius; ++dy) {
        for (int dx = -erosion_radius; dx <= erosion_radius; ++dx) {
          if (out.mask.contains(x + dx, y + dy)) out.mask.at(x + dx, y + dy) = 0;
        }
      }
    }
  }
  return detail::finish(in, std::move(out), CleanStage::FlyingPoints);
}

/// Stage 3: joint bilateral smoothing guided by `rgb`. Each valid pixel
/// becomes the normalized weighted mean over valid pixels in the window;
/// invalid pixels are neither read nor written.
inline CleanResult bilateral_filter(const DepthFrame& frame, const ColorImage& rgb, int window,
                                    double sigma_spatial, double sigma_color) {
  if (!frame.depth.same_shape(rgb)) {
    throw InvalidArgument("RGB guide is " + shape_string(rgb.width(), rgb.height()) +
                          " but depth is " + shape_string(frame.width(), frame.height()));
  }
  if (window < 3 || window % 2 == 0) throw InvalidArgument("bilateral window must be odd and >= 3");
  if (!(sigma_spatial > 0.0) || !(sigma_color > 0.0)) {
    throw InvalidArgument("bilateral sigmas must be positive");
  }
  const DepthFrame in = detail::normalized(frame);
  const int w = in.width();
  const int h = in.height();
  const int r = window / 2;
  const double inv_s = 1.0 / (2.0 * sigma_spatial * sigma_spatial);
  const double inv_c = 1.0 / (2.0 * sigma_color * sigma_color);

  DepthFrame out = in;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!in.mask.at(x, y)) continue;
      const auto& c0 = rgb.at(x, y);
      double num = 0.0;
      double den = 0.0;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          const int qx = x + dx;
          const int qy = y + dy;
          if (!in.mask.contains(qx, qy) || !in.mask.at(qx, qy)) continue;
          const auto& c1 = rgb.at(qx, qy);
          const double dc = (c1[0] - c0[0]) * (c1[0] - c0[0]) + (c1[1] - c0[1]) * (c1[1] - c0[1]) +
                            (c1[2] - c0[2]) * (c1[2] - c0[2]);
          const double wgt = std::exp(-(dx * dx + dy * dy) * inv_s - dc * inv_c);
          num += wgt * in.depth.at(qx, qy);
          den += wgt;
        }
      }
      out.depth.at(x, y) = num / den;
    }
  }
  return detail::finish(in, std::move(out), CleanStage::Bilateral);
}

/// Stage 4: drop connected components of the valid mask smaller than
/// `min_area` pixels.
inline CleanResult remove_small_components(const DepthFrame& frame, int min_area,
                                           int connectivity = 4) {
  if (min_area < 1) throw InvalidArgument("minimum component area must be >= 1");
  if (connectivity != 4 && connectivity != 8) throw InvalidArgument("connectivity must be 4 or 8");
  const DepthFrame in = detail::normalized(frame);
  const int w = in.width();
  const int h = in.height();

  static constexpr std::array<std::array<int, 2>, 8> kOffsets = {
      {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};
  const auto neighbors = static_cast<std::size_t>(connectivity);

  DepthFrame out = in;
  std::vector<std::uint8_t> seen(in.mask.size(), 0);
  std::vector<std::size_t> component;
  for (std::size_t start = 0; start < in.mask.size(); ++start) {
    if (!in.mask[start] || seen[start]) continue;
    component.clear();
    component.push_back(start);
    seen[start] = 1;
    for (std::size_t head = 0; head < component.size(); ++head) {
      const int x = static_cast<int>(component[head] % static_cast<std::size_t>(w));
      const int y = static_cast<int>(component[head] / static_cast<std::size_t>(w));
      for (std::size_t k = 0; k < neighbors; ++k) {
        const int qx = x + kOffsets[k][0];
        const int qy = y + kOffsets[k][1];
        if (qx < 0 || qy < 0 || qx >= w || qy >= h) continue;
        const std::size_t q = static_cast<std::size_t>(qy) * static_cast<std::size_t>(w) +
                              static_cast<std::size_t>(qx);
        if (in.mask[q] && !seen[q]) {
          seen[q] = 1;
          component.push_back(q);
        }
      }
    }
    if (component.size() < static_cast<std::size_t>(min_area)) {
      for (const auto p : component) out.mask[p] = 0;
    }
  }
  return detail::finish(in, std::move(out), CleanStage::SmallComponents);
}

/// Stage 5: sky pixels (non-zero in `sky`) become invalid.
inline CleanResult apply_sky_mask(const DepthFrame& frame, const Mask& sky) {
  if (!frame.depth.same_shape(sky)) {
    throw InvalidArgument("sky mask is " + shape_string(sky.width(), sky.height()) +
                          " but depth is " + shape_string(frame.width(), frame.height()));
  }
  const DepthFrame in = detail::normalized(frame);
  DepthFrame out = in;
  for (std::size_t i = 0; i < out.mask.size(); ++i) {
    if (sky[i]) out.mask[i] = 0;
  }
  return detail::finish(in, std::move(out), CleanStage::Sky);
}

/// Stages 1-5 in order; stage 5 runs only when a sky mask is given.
inline CleanResult clean_pipeline(const DepthFrame& frame, const ColorImage& rgb,
                                  const std::optional<Mask>& sky, const CleanConfig& cfg) {
  cfg.validate();
  CleanResult total;
  auto absorb = [&total](CleanResult stage) {
    for (std::size_t k = 0; k < kCleanStageCount; ++k) total.invalidated[k] += stage.invalidated[k];
    total.frame = std::move(stage.frame);
  };
  absorb(clip_range(frame, cfg.d_min, cfg.d_max));
  absorb(remove_flying_points(total.frame, cfg.flying_threshold, cfg.erosion_radius));
  absorb(bilateral_filter(total.frame, rgb, cfg.bilateral_window, cfg.sigma_spatial,
                          cfg.sigma_color));
  absorb(remove_small_components(total.frame, cfg.min_component_area, cfg.connectivity));
  if (sky) absorb(apply_sky_mask(total.frame, *sky));
  return total;
}

}  // namespace geoeval
