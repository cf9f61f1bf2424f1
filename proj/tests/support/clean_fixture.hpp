#pragma once

// 48x32 frame with one artifact per cleaning stage and the exact pixel set
// each stage is expected to invalidate under the default CleanConfig.
//
//   rows 0-2          7 m, outside [0.05, 5]             -> range
//   x < 24 / x >= 24  1 m / 3 m step at x = 23            -> flying points, x 21..25
//   x 2-12, y 10-20   invalid hole holding two 1-px speckles -> small components
//   x 40-47, y 3-8    sky mask                            -> sky

#include <array>
#include <set>

#include <geoeval/depth_clean.hpp>

namespace geoeval::fixture {

struct CleanFixture {
  DepthFrame frame;
  ColorImage rgb;
  Mask sky;
  std::array<std::set<std::size_t>, kCleanStageCount> expected;
};

inline CleanFixture clean_fixture() {
  constexpr int w = 48;
  constexpr int h = 32;
  CleanFixture f;
  f.frame = DepthFrame(w, h, 1.0, true);
  f.rgb = ColorImage(w, h, {0.5, 0.5, 0.5});
  f.sky = Mask(w, h, 0);
  auto idx = [](int x, int y) { return static_cast<std::size_t>(y * w + x); };
  auto expect = [&](CleanStage s) -> std::set<std::size_t>& {
    return f.expected[static_cast<std::size_t>(s)];
  };

  for (int y = 0; y < h; ++y) {
    for (int x = 24; x < w; ++x) f.frame.depth.at(x, y) = 3.0;
  }
  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x < w; ++x) {
      f.frame.depth.at(x, y) = 7.0;
      expect(CleanStage::Range).insert(idx(x, y));
    }
  }
  for (int y = 3; y < h; ++y) {
    for (int x = 21; x <= 25; ++x) expect(CleanStage::FlyingPoints).insert(idx(x, y));
  }
  for (int y = 10; y <= 20; ++y) {
    for (int x = 2; x <= 12; ++x) {
      f.frame.mask.at(x, y) = 0;
      f.frame.depth.at(x, y) = 0.0;
    }
  }
  for (const auto& [x, y] : {std::pair{5, 13}, std::pair{9, 17}}) {
    f.frame.mask.at(x, y) = 1;
    f.frame.depth.at(x, y) = 1.0 + 0.1 * x;
    expect(CleanStage::SmallComponents).insert(idx(x, y));
  }
  for (int y = 3; y <= 8; ++y) {
    for (int x = 40; x < w; ++x) {
      f.sky.at(x, y) = 1;
      expect(CleanStage::Sky).insert(idx(x, y));
    }
  }
  return f;
}

/// Pixels valid in `before` but not in `after`.
inline std::set<std::size_t> dropped(const DepthFrame& before, const DepthFrame& after) {
  std::set<std::size_t> out;
  for (std::size_t i = 0; i < before.mask.size(); ++i) {
    if (before.valid(i) && !after.valid(i)) out.insert(i);
  }
  return out;
}

inline bool valid_subset(const DepthFrame& before, const DepthFrame& after) {
  for (std::size_t i = 0; i < before.mask.size(); ++i) {
    if (after.valid(i) && !before.valid(i)) return false;
  }
  return true;
}

struct StageTrace {
  std::array<DepthFrame, kCleanStageCount + 1> frames;  ///< input, then after each stage
};

inline StageTrace run_stages(const CleanFixture& f, const CleanConfig& cfg = {}) {
  StageTrace t;
  t.frames[0] = f.frame;
  t.frames[1] = clip_range(t.frames[0], cfg.d_min, cfg.d_max).frame;
  t.frames[2] = remove_flying_points(t.frames[1], cfg.flying_threshold, cfg.erosion_radius).frame;
  t.frames[3] = bilateral_filter(t.frames[2], f.rgb, cfg.bilateral_window, cfg.sigma_spatial, cfg.sigma_color).frame;
  t.frames[4] = remove_small_components(t.frames[3], cfg.min_component_area, cfg.connectivity).frame;
  t.frames[5] = apply_sky_mask(t.frames[4], f.sky).frame;
  return t;
}

}  // namespace geoeval::fixture
