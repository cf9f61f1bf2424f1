#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "geoeval/error.hpp"
#include "geoeval/geometry.hpp"
#include "geoeval/image.hpp"

namespace geoeval {

enum class Regime { Single, Sparse, Medium, Dense };

inline constexpr std::array<Regime, 4> kAllRegimes = {Regime::Single, Regime::Sparse,
                                                      Regime::Medium, Regime::Dense};

inline std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::Single: return "single";
    case Regime::Sparse: return "sparse";
    case Regime::Medium: return "medium";
    case Regime::Dense: return "dense";
  }
  return "?";
}

inline Regime regime_from_string(std::string_view s) {
  for (const Regime r : kAllRegimes) {
    if (to_string(r) == s) return r;
  }
  throw InvalidArgument("unknown regime '" + std::string(s) + "'");
}

struct RegimeSelection {
  Regime regime = Regime::Single;
  std::vector<std::int64_t> frames;

  /// Strictly increasing, inside [0, n) when n is given, one frame for single.
  void validate(std::optional<std::int64_t> n = std::nullopt) const {
    if (frames.empty()) throw InvalidArgument("regime selection is empty");
    if (regime == Regime::Single && frames.size() != 1) {
      throw InvalidArgument("single regime must have exactly one frame");
    }
    for (std::size_t i = 0; i < frames.size(); ++i) {
      if (frames[i] < 0) throw InvalidArgument("frame indices must be non-negative");
      if (n && frames[i] >= *n) throw InvalidArgument("frame index out of range");
      if (i > 0 && frames[i] <= frames[i - 1]) {
        throw InvalidArgument("frame indices must be strictly increasing");
      }
    }
  }
};

using VoxelKey = std::array<std::int64_t, 3>;

inline VoxelKey voxel_key(const Vec3& p, double voxel_size) {
  return {static_cast<std::int64_t>(std::floor(p.x() / voxel_size)),
          static_cast<std::int64_t>(std::floor(p.y() / voxel_size)),
          static_cast<std::int64_t>(std::floor(p.z() / voxel_size))};
}

/// Occupied voxels of a scene and the subset each frame sees. Coverage lists
/// hold sorted positions into the sorted `universe`.
struct VoxelSupport {
  double voxel_size = 0.0;
  std::vector<VoxelKey> universe;
  std::vector<std::vector<std::uint32_t>> coverage;

  [[nodiscard]] std::size_t frame_count() const { return coverage.size(); }

  [[nodiscard]] std::vector<VoxelKey> frame_keys(std::size_t f) const {
    std::vector<VoxelKey> keys;
    keys.reserve(coverage[f].size());
    for (const auto id : coverage[f]) keys.push_back(universe[id]);
    return keys;
  }
};

/// A depth map placed in the world.
struct PosedDepthFrame {
  DepthFrame depth;
  Pose pose;
  Intrinsics intrinsics;
};

namespace detail {

inline std::vector<VoxelKey> frame_voxel_keys(const PosedDepthFrame& f, double voxel_size) {
  f.depth.validate();
  const Pose c2w = f.pose.as(PoseConvention::CameraToWorld);
  const Mat3& r = c2w.rotation.matrix();
  std::vector<VoxelKey> keys;
  for (int v = 0; v < f.depth.height(); ++v) {
    for (int u = 0; u < f.depth.width(); ++u) {
      if (!f.depth.valid(u, v)) continue;
      const Vec3 cam = f.intrinsics.unproject(u, v, f.depth.depth.at(u, v));
      keys.push_back(voxel_key(r * cam + c2w.translation, voxel_size));
    }
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

}  // namespace detail

/// Unprojects every valid pixel and quantizes it to floor(X / voxel_size).
/// Frames may be processed on `threads` workers; the result does not depend
/// on the thread count.
inline VoxelSupport build_voxel_support(std::span<const PosedDepthFrame> frames,
                                        double voxel_size, unsigned threads = 1) {
  if (frames.empty()) throw DataError("voxel support needs at least one frame");
  if (!(voxel_size > 0.0)) throw InvalidArgument("voxel size must be positive");

  std::vector<std::vector<VoxelKey>> per_frame(frames.size());
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(frames.size())));
  if (threads == 1) {
    for (std::size_t i = 0; i < frames.size(); ++i) {
      per_frame[i] = detail::frame_voxel_keys(frames[i], voxel_size);
    }
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < frames.size(); i += threads) {
          per_frame[i] = detail::frame_voxel_keys(frames[i], voxel_size);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  VoxelSupport support;
  support.voxel_size = voxel_size;
  for (const auto& keys : per_frame) {
    support.universe.insert(support.universe.end(), keys.begin(), keys.end());
  }
  std::sort(support.universe.begin(), support.universe.end());
  support.universe.erase(std::unique(support.universe.begin(), support.universe.end()),
                         support.universe.end());
  if (support.universe.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw DataError("voxel universe too large");
  }

  support.coverage.resize(frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    auto& ids = support.coverage[f];
    ids.reserve(per_frame[f].size());
    // Both lists are sorted, so a single forward scan suffices.
    auto it = support.universe.begin();
    for (const auto& k : per_frame[f]) {
      it = std::lower_bound(it, support.universe.end(), k);
      ids.push_back(static_cast<std::uint32_t>(it - support.universe.begin()));
    }
  }
  return support;
}

/// Builds a support directly from per-frame key sets (used for synthetic
/// instances and tests).
inline VoxelSupport make_voxel_support(std::vector<std::vector<VoxelKey>> keys_per_frame,
                                       double voxel_size = 1.0) {
  VoxelSupport s;
  s.voxel_size = voxel_size;
  for (auto& keys : keys_per_frame) {
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    s.universe.insert(s.universe.end(), keys.begin(), keys.end());
  }
  std::sort(s.universe.begin(), s.universe.end());
  s.universe.erase(std::unique(s.universe.begin(), s.universe.end()), s.universe.end());
  for (const auto& keys : keys_per_frame) {
    std::vector<std::uint32_t> ids;
    for (const auto& k : keys) {
      ids.push_back(static_cast<std::uint32_t>(
          std::lower_bound(s.universe.begin(), s.universe.end(), k) - s.universe.begin()));
    }
    s.coverage.push_back(std::move(ids));
  }
  return s;
}

/// clamp(ceil(N / divisor), lower, upper).
struct BudgetRule {
  std::int64_t lower = 0;
  std::int64_t upper = std::numeric_limits<std::int64_t>::max();
  double divisor = 1.0;

  [[nodiscard]] std::int64_t operator()(std::int64_t n) const {
    const auto raw = static_cast<std::int64_t>(std::ceil(static_cast<double>(n) / divisor));
    return std::clamp(raw, lower, std::max(lower, upper));
  }
};

struct SamplerConfig {
  double sparse_voxel_size = 0.05;
  double medium_coarsening = 2.0;
  std::int64_t sparse_budget = 12;
  BudgetRule medium_min{8, std::numeric_limits<std::int64_t>::max(), 20.0};
  BudgetRule medium_max{0, 64, 5.0};
  std::int64_t dense_budget = 500;

  [[nodiscard]] double medium_voxel_size() const { return sparse_voxel_size * medium_coarsening; }

  /// Lower medium bound; throws when it exceeds the frame count.
  [[nodiscard]] std::int64_t medium_lower(std::int64_t n) const {
    const std::int64_t lo = medium_min(n);
    if (lo > n) {
      throw DataError("medium regime needs " + std::to_string(lo) + " frames but scene has " +
                      std::to_string(n));
    }
    return lo;
  }

  /// Upper medium bound, never below the lower bound nor above n.
  [[nodiscard]] std::int64_t medium_upper(std::int64_t n) const {
    return std::min(n, std::max(medium_min(n), medium_max(n)));
  }

  void validate() const {
    if (!(sparse_voxel_size > 0.0)) throw InvalidArgument("sparse voxel size must be positive");
    if (!(medium_coarsening > 0.0)) throw InvalidArgument("medium coarsening must be positive");
    if (sparse_budget < 1) throw InvalidArgument("sparse budget K must be >= 1");
    if (dense_budget < 1) throw InvalidArgument("dense budget T must be >= 1");
    if (!(medium_min.divisor > 0.0) || !(medium_max.divisor > 0.0)) {
      throw InvalidArgument("budget divisors must be positive");
    }
  }
};

/// Greedy max-coverage outcome in pick order.
struct GreedyTrace {
  std::vector<std::int64_t> order;
  std::vector<std::size_t> gains;
  std::size_t covered = 0;

  [[nodiscard]] std::vector<std::int64_t> sorted_frames() const {
    auto f = order;
    std::sort(f.begin(), f.end());
    return f;
  }
};

/// Greedy coverage: pick the unused frame with the largest marginal gain
/// (lowest index on ties). Once every remaining gain is zero, stop if at
/// least `min_count` frames are chosen, otherwise fill with the lowest unused
/// indices. Never exceeds `max_count`.
inline GreedyTrace greedy_cover(const VoxelSupport& support, std::size_t min_count,
                                std::size_t max_count) {
  const std::size_t n = support.frame_count();
  if (n == 0 || support.universe.empty()) throw DataError("empty voxel support");
  max_count = std::min(max_count, n);
  min_count = std::min(min_count, max_count);

  std::vector<std::uint8_t> covered(support.universe.size(), 0);
  std::vector<std::uint8_t> used(n, 0);
  GreedyTrace trace;
  while (trace.order.size() < max_count) {
    std::size_t best = n;
    std::size_t best_gain = 0;
    for (std::size_t f = 0; f < n; ++f) {
      if (used[f]) continue;
      std::size_t gain = 0;
      for (const auto id : support.coverage[f]) gain += covered[id] ? 0 : 1;
      if (best == n || gain > best_gain) {
        best = f;
        best_gain = gain;
      }
    }
    if (best_gain == 0 && trace.order.size() >= min_count) break;
    used[best] = 1;
    for (const auto id : support.coverage[best]) covered[id] = 1;
    trace.order.push_back(static_cast<std::int64_t>(best));
    trace.gains.push_back(best_gain);
    trace.covered += best_gain;
  }
  return trace;
}

inline RegimeSelection select_sparse(const VoxelSupport& support, std::int64_t budget) {
  if (budget < 1) throw InvalidArgument("sparse budget K must be >= 1");
  const auto trace = greedy_cover(support, 0, static_cast<std::size_t>(budget));
  return {Regime::Sparse, trace.sorted_frames()};
}

/// `support` should be built at the coarser medium voxel size.
inline RegimeSelection select_medium(const VoxelSupport& support, std::int64_t n,
                                     const SamplerConfig& cfg) {
  if (n < 1) throw InvalidArgument("frame count must be positive");
  if (static_cast<std::size_t>(n) != support.frame_count()) {
    throw InvalidArgument("frame count does not match voxel support");
  }
  const std::int64_t lo = cfg.medium_lower(n);
  const std::int64_t hi = cfg.medium_upper(n);
  const auto trace =
      greedy_cover(support, static_cast<std::size_t>(lo), static_cast<std::size_t>(hi));
  return {Regime::Medium, trace.sorted_frames()};
}

/// Every frame when n <= budget, otherwise every ceil(n / budget)-th.
inline RegimeSelection select_dense(std::int64_t n, std::int64_t budget) {
  if (n < 1) throw InvalidArgument("frame count must be positive");
  if (budget < 1) throw InvalidArgument("dense budget T must be >= 1");
  const std::int64_t stride = n <= budget ? 1 : (n + budget - 1) / budget;
  RegimeSelection sel{Regime::Dense, {}};
  sel.frames.reserve(static_cast<std::size_t>((n + stride - 1) / stride));
  for (std::int64_t i = 0; i < n; i += stride) sel.frames.push_back(i);
  return sel;
}

inline RegimeSelection select_single(std::int64_t n) {
  if (n < 1) throw InvalidArgument("frame count must be positive");
  return {Regime::Single, {(n - 1) / 2}};
}

}  // namespace geoeval
