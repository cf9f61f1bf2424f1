#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <thread>
#include <vector>

#include "geoeval/error.hpp"
#include "geoeval/geometry.hpp"
#include "geoeval/image.hpp"
#include "geoeval/kdtree.hpp"
#include "geoeval/sampling.hpp"

namespace geoeval {

struct ReconMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double fscore = 0.0;
  double mean_acc = 0.0;   ///< metres, prediction -> GT
  double mean_comp = 0.0;  ///< metres, GT -> prediction
  double overall = 0.0;
};

struct ReconConfig {
  double distance_threshold = 0.05;
  double voxel_size = 0.02;
  double crop_inflation = 0.1;
  bool crop = true;
  /// Map the predicted cloud through the trajectory Sim(3) before scoring.
  bool align_to_gt = true;

  void validate() const {
    if (!(distance_threshold > 0.0)) throw InvalidArgument("distance threshold must be positive");
    if (!(voxel_size > 0.0)) throw InvalidArgument("voxel size must be positive");
    if (!(crop_inflation >= 0.0)) throw InvalidArgument("crop inflation must be non-negative");
  }
};

/// Prediction points inside GT's axis-aligned box grown by `inflation`.
inline PointCloud crop_to_bbox(const PointCloud& pred, const PointCloud& gt, double inflation) {
  if (gt.empty()) throw DataError("empty point set");
  Vec3 lo = gt.points.front();
  Vec3 hi = lo;
  for (const auto& p : gt.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  lo.array() -= inflation;
  hi.array() += inflation;
  PointCloud out;
  for (const auto& p : pred.points) {
    if ((p.array() >= lo.array()).all() && (p.array() <= hi.array()).all()) out.points.push_back(p);
  }
  return out;
}

/// One centroid per occupied voxel, ordered by voxel key.
inline PointCloud voxel_downsample(const PointCloud& cloud, double voxel) {
  if (!(voxel > 0.0)) throw InvalidArgument("voxel size must be positive");
  std::vector<std::pair<VoxelKey, std::size_t>> keyed;
  keyed.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    keyed.emplace_back(voxel_key(cloud.points[i], voxel), i);
  }
  std::sort(keyed.begin(), keyed.end());

  PointCloud out;
  for (std::size_t a = 0; a < keyed.size();) {
    std::size_t b = a;
    Vec3 sum = Vec3::Zero();
    while (b < keyed.size() && keyed[b].first == keyed[a].first) {
      sum += cloud.points[keyed[b].second];
      ++b;
    }
    out.points.push_back(sum / static_cast<double>(b - a));
    a = b;
  }
  return out;
}

/// Exact nearest-neighbour distance from every query to `reference`,
/// in query order. Deterministic for any thread count.
inline std::vector<double> nearest_distances(const PointCloud& queries, const PointCloud& reference,
                                             unsigned threads = 1) {
  if (reference.empty()) throw DataError("empty point set");
  const KdTree tree(reference.points);
  std::vector<double> out(queries.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      out[i] = std::sqrt(tree.nearest(queries.points[i]).squared_distance);
    }
  };
  threads = std::max(1u, threads);
  if (threads == 1 || queries.size() < 1024) {
    work(0, queries.size());
    return out;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (queries.size() + threads - 1) / threads;
  for (std::size_t begin = 0; begin < queries.size(); begin += chunk) {
    pool.emplace_back(work, begin, std::min(queries.size(), begin + chunk));
  }
  for (auto& t : pool) t.join();
  return out;
}

inline ReconMetrics chamfer_stats(const PointCloud& pred, const PointCloud& gt, double d_tau,
                                  unsigned threads = 1) {
  if (pred.empty() || gt.empty()) throw DataError("empty point set");
  if (!(d_tau > 0.0)) throw InvalidArgument("distance threshold must be positive");
  const auto acc = nearest_distances(pred, gt, threads);
  const auto comp = nearest_distances(gt, pred, threads);

  auto summarize = [d_tau](const std::vector<double>& d, double& mean, double& within) {
    double sum = 0.0;
    std::size_t hits = 0;
    for (const double x : d) {
      sum += x;
      hits += x < d_tau ? 1 : 0;
    }
    mean = sum / static_cast<double>(d.size());
    within = static_cast<double>(hits) / static_cast<double>(d.size());
  };

  ReconMetrics m;
  summarize(acc, m.mean_acc, m.precision);
  summarize(comp, m.mean_comp, m.recall);
  m.fscore = m.precision + m.recall > 0.0
                 ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                 : 0.0;
  m.overall = 0.5 * (m.mean_acc + m.mean_comp);
  return m;
}

/// Crop (optional), downsample both clouds, then score.
inline ReconMetrics evaluate_reconstruction(const PointCloud& pred, const PointCloud& gt,
                                            const ReconConfig& cfg, unsigned threads = 1) {
  cfg.validate();
  if (gt.empty()) throw DataError("empty point set");
  const PointCloud cropped = cfg.crop ? crop_to_bbox(pred, gt, cfg.crop_inflation) : pred;
  if (cropped.empty()) throw DataError("empty point set after cropping");
  return chamfer_stats(voxel_downsample(cropped, cfg.voxel_size),
                       voxel_downsample(gt, cfg.voxel_size), cfg.distance_threshold, threads);
}

/// Unprojects every `stride`-th valid pixel (in both image axes) of every
/// frame and concatenates them frame-major, row-major.
///
/// A simplified substitute for volumetric fusion; externally fused clouds
/// can be scored directly instead.
inline PointCloud fuse_depth_maps(std::span<const PosedDepthFrame> frames, int stride = 1) {
  if (frames.empty()) throw InvalidArgument("no frames to fuse");
  if (stride < 1) throw InvalidArgument("pixel stride must be >= 1");
  PointCloud out;
  for (const auto& f : frames) {
    f.depth.validate();
    const Pose c2w = f.pose.as(PoseConvention::CameraToWorld);
    for (int v = 0; v < f.depth.height(); v += stride) {
      for (int u = 0; u < f.depth.width(); u += stride) {
        if (!f.depth.valid(u, v)) continue;
        out.points.push_back(c2w.rotation * f.intrinsics.unproject(u, v, f.depth.depth.at(u, v)) +
                             c2w.translation);
      }
    }
  }
  if (out.empty()) throw DataError("no valid pixels to fuse");
  return out;
}

}  // namespace geoeval
