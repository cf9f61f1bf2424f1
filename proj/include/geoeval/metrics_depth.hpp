#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "geoeval/error.hpp"
#include "geoeval/image.hpp"

namespace geoeval {

enum class DepthMode { MedianAligned, Metric };

/// Stand-in for predicted depths that are missing or non-positive where the
/// ground truth is valid. They are penalized, never dropped.
inline constexpr double kMinPredictedDepth = 1e-6;

struct DepthOptions {
  std::vector<double> delta_thresholds{1.03, 1.05, 1.10};
};

struct DeltaRatio {
  double threshold = 0.0;
  double value = 0.0;
};

struct DepthMetrics {
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double rmse = 0.0;
  double log_rmse = 0.0;
  std::vector<DeltaRatio> deltas;
  std::size_t pixels = 0;

  /// Inlier ratio for threshold `tau`; throws if it was not computed.
  [[nodiscard]] double delta(double tau) const {
    for (const auto& d : deltas) {
      if (std::abs(d.threshold - tau) < 1e-12) return d.value;
    }
    throw InvalidArgument("delta threshold not computed");
  }
};

/// Running sums over ground-truth-valid pixels so several frames can be
/// pooled before normalizing.
class DepthAccumulator {
 public:
  explicit DepthAccumulator(const DepthOptions& opts = {})
      : thresholds_(opts.delta_thresholds), hits_(opts.delta_thresholds.size(), 0) {}

  void add(double gt, double pred) {
    const double diff = gt - pred;
    abs_rel_ += std::abs(diff) / gt;
    sq_rel_ += diff * diff / gt;
    sq_ += diff * diff;
    const double log_diff = std::log(gt) - std::log(pred);
    log_sq_ += log_diff * log_diff;
    const double ratio = std::max(gt / pred, pred / gt);
    for (std::size_t k = 0; k < thresholds_.size(); ++k) hits_[k] += ratio < thresholds_[k] ? 1 : 0;
    ++count_;
  }

  void merge(const DepthAccumulator& other) {
    if (other.thresholds_ != thresholds_) throw InvalidArgument("delta thresholds differ");
    abs_rel_ += other.abs_rel_;
    sq_rel_ += other.sq_rel_;
    sq_ += other.sq_;
    log_sq_ += other.log_sq_;
    for (std::size_t k = 0; k < hits_.size(); ++k) hits_[k] += other.hits_[k];
    count_ += other.count_;
  }

  [[nodiscard]] std::size_t count() const { return count_; }

  [[nodiscard]] DepthMetrics finish() const {
    if (count_ == 0) throw DataError("no overlap");
    const auto n = static_cast<double>(count_);
    DepthMetrics m;
    m.abs_rel = abs_rel_ / n;
    m.sq_rel = sq_rel_ / n;
    m.rmse = std::sqrt(sq_ / n);
    m.log_rmse = std::sqrt(log_sq_ / n);
    for (std::size_t k = 0; k < thresholds_.size(); ++k) {
      m.deltas.push_back({thresholds_[k], static_cast<double>(hits_[k]) / n});
    }
    m.pixels = count_;
    return m;
  }

 private:
  std::vector<double> thresholds_;
  std::vector<std::size_t> hits_;
  double abs_rel_ = 0.0;
  double sq_rel_ = 0.0;
  double sq_ = 0.0;
  double log_sq_ = 0.0;
  std::size_t count_ = 0;
};

namespace detail {

inline void require_same_shape(const DepthFrame& pred, const DepthFrame& gt) {
  pred.validate();
  gt.validate();
  if (!pred.depth.same_shape(gt.depth)) {
    throw InvalidArgument("depth dimensions differ: prediction " +
                          shape_string(pred.width(), pred.height()) + ", ground truth " +
                          shape_string(gt.width(), gt.height()));
  }
}

inline double median_in_place(std::vector<double>& v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace detail

/// median(D / D̂) over pixels valid in both frames.
inline double median_scale(const DepthFrame& pred, const DepthFrame& gt) {
  detail::require_same_shape(pred, gt);
  std::vector<double> ratios;
  ratios.reserve(gt.depth.size());
  for (std::size_t i = 0; i < gt.depth.size(); ++i) {
    if (gt.valid(i) && pred.valid(i)) ratios.push_back(gt.depth[i] / pred.depth[i]);
  }
  if (ratios.empty()) throw DataError("no overlap");
  return detail::median_in_place(ratios);
}

/// Adds one frame's pixels to `acc`; returns the scale applied to the
/// prediction (1 in metric mode).
inline double accumulate_depth(const DepthFrame& pred, const DepthFrame& gt, DepthMode mode,
                               DepthAccumulator& acc) {
  detail::require_same_shape(pred, gt);
  const double scale = mode == DepthMode::MedianAligned ? median_scale(pred, gt) : 1.0;
  bool overlap = false;
  for (std::size_t i = 0; i < gt.depth.size(); ++i) {
    if (!gt.valid(i)) continue;
    const bool usable = pred.valid(i);
    overlap = overlap || usable;
    const double p = usable ? std::max(scale * pred.depth[i], kMinPredictedDepth)
                            : kMinPredictedDepth;
    acc.add(gt.depth[i], p);
  }
  if (!overlap) throw DataError("no overlap");
  return scale;
}

inline DepthMetrics depth_metrics(const DepthFrame& pred, const DepthFrame& gt, DepthMode mode,
                                  const DepthOptions& opts = {}) {
  DepthAccumulator acc(opts);
  accumulate_depth(pred, gt, mode, acc);
  return acc.finish();
}

struct SceneDepthMetrics {
  DepthMetrics pooled;
  std::vector<DepthMetrics> per_frame;
  std::vector<double> scales;
};

/// Per-frame alignment, pixels pooled across frames in order.
inline SceneDepthMetrics scene_depth_metrics(std::span<const DepthFrame> preds,
                                             std::span<const DepthFrame> gts, DepthMode mode,
                                             const DepthOptions& opts = {}) {
  if (preds.size() != gts.size()) throw InvalidArgument("frame counts differ");
  if (gts.empty()) throw InvalidArgument("no frames");
  SceneDepthMetrics out;
  DepthAccumulator pooled(opts);
  for (std::size_t f = 0; f < gts.size(); ++f) {
    DepthAccumulator frame(opts);
    out.scales.push_back(accumulate_depth(preds[f], gts[f], mode, frame));
    out.per_frame.push_back(frame.finish());
    pooled.merge(frame);
  }
  out.pooled = pooled.finish();
  return out;
}

}  // namespace geoeval
