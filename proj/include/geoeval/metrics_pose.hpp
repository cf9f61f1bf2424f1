#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "geoeval/error.hpp"
#include "geoeval/geometry.hpp"

namespace geoeval {

enum class TranslationStatus { Defined, GtDegenerate, PredDegenerate };

struct PairError {
  std::int64_t i = 0;
  std::int64_t j = 0;
  double rotation_deg = 0.0;
  double translation_deg = 0.0;
  TranslationStatus translation_status = TranslationStatus::Defined;

  [[nodiscard]] double joint_deg() const { return std::max(rotation_deg, translation_deg); }
};

/// All pairs i < j, sorted by (i, j).
struct PairErrorSet {
  std::vector<PairError> pairs;

  [[nodiscard]] std::size_t size() const { return pairs.size(); }
  [[nodiscard]] bool empty() const { return pairs.empty(); }
};

/// Angle between two unit vectors with the sign ambiguity folded, in [0, 90].
inline double folded_direction_angle_deg(const Vec3& a, const Vec3& b) {
  const double c = std::min(std::abs(a.dot(b)), 1.0);
  const double s = a.cross(b).norm();
  return std::atan2(s, c) * kRadToDeg;
}

/// Rotation and translation-direction errors over every pair i < j.
///
/// Degenerate baselines: a pair whose ground-truth cameras coincide cannot be
/// measured and scores 0°; a prediction that collapses a real baseline
/// scores 90°, the worst defined value.
inline PairErrorSet pairwise_errors(const Trajectory& pred, const Trajectory& gt) {
  if (pred.size() != gt.size()) throw InvalidArgument("trajectory lengths differ");
  if (gt.size() < 2) throw InvalidArgument("pairwise errors need at least two poses");
  for (std::size_t k = 0; k < gt.size(); ++k) {
    if (pred[k].frame != gt[k].frame) throw InvalidArgument("trajectory frame indices differ");
  }
  const Trajectory p = pred.as(PoseConvention::WorldToCamera);
  const Trajectory g = gt.as(PoseConvention::WorldToCamera);

  PairErrorSet out;
  const std::size_t n = g.size();
  out.pairs.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      PairError e;
      e.i = g[i].frame;
      e.j = g[j].frame;
      e.rotation_deg = geodesic_angle_deg(relative_rotation(g[i].pose, g[j].pose),
                                          relative_rotation(p[i].pose, p[j].pose));
      const auto dir_gt = relative_translation_direction(g[i].pose, g[j].pose);
      const auto dir_pred = relative_translation_direction(p[i].pose, p[j].pose);
      if (!dir_gt) {
        e.translation_deg = 0.0;
        e.translation_status = TranslationStatus::GtDegenerate;
      } else if (!dir_pred) {
        e.translation_deg = 90.0;
        e.translation_status = TranslationStatus::PredDegenerate;
      } else {
        e.translation_deg = folded_direction_angle_deg(*dir_gt, *dir_pred);
      }
      out.pairs.push_back(e);
    }
  }
  return out;
}

enum class AccuracyKind { Rotation, Translation, Joint };

/// Fraction of pairs whose error is strictly below `threshold_deg`.
inline double accuracy_at(const PairErrorSet& errs, double threshold_deg, AccuracyKind kind) {
  if (errs.empty()) throw DataError("empty pair error set");
  if (!(threshold_deg > 0.0)) throw InvalidArgument("accuracy threshold must be positive");
  std::size_t hits = 0;
  for (const auto& e : errs.pairs) {
    const double v = kind == AccuracyKind::Rotation      ? e.rotation_deg
                     : kind == AccuracyKind::Translation ? e.translation_deg
                                                         : e.joint_deg();
    hits += v < threshold_deg ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(errs.size());
}

inline constexpr double kDefaultAucStepDeg = 0.1;
/// Joint errors at or below this count as zero for the x = 0 sample.
inline constexpr double kAucZeroErrorDeg = 1e-9;

/// Normalized area under the joint accuracy curve on [0, x_max].
///
/// Trapezoidal rule over a uniform grid (step ~`step_deg`, adjusted so the
/// grid ends exactly at x_max). Acc is a left-continuous step function, so
/// the x = 0 sample uses its right limit: the fraction of pairs whose joint
/// error is zero up to kAucZeroErrorDeg.
inline double auc(const PairErrorSet& errs, double x_max, double step_deg = kDefaultAucStepDeg) {
  if (errs.empty()) throw DataError("empty pair error set");
  if (!(x_max > 0.0)) throw InvalidArgument("AUC cap must be positive");
  if (!(step_deg > 0.0)) throw InvalidArgument("AUC step must be positive");

  std::vector<double> joint;
  joint.reserve(errs.size());
  for (const auto& e : errs.pairs) joint.push_back(e.joint_deg());
  std::sort(joint.begin(), joint.end());
  const auto n = static_cast<double>(joint.size());

  auto steps = static_cast<std::int64_t>(std::llround(x_max / step_deg));
  if (steps < 1 || std::abs(static_cast<double>(steps) * step_deg - x_max) > 1e-9 * x_max) {
    steps = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(x_max / step_deg)));
  }
  const double h = x_max / static_cast<double>(steps);

  auto acc_below = [&](double x) {
    return static_cast<double>(std::lower_bound(joint.begin(), joint.end(), x) - joint.begin()) / n;
  };
  const double at_zero =
      static_cast<double>(std::upper_bound(joint.begin(), joint.end(), kAucZeroErrorDeg) - joint.begin()) / n;

  double sum = 0.5 * (at_zero + acc_below(x_max));
  for (std::int64_t k = 1; k < steps; ++k) sum += acc_below(static_cast<double>(k) * h);
  return sum / static_cast<double>(steps);
}

struct PoseMetricOptions {
  std::vector<double> accuracy_thresholds{3.0, 5.0};
  std::vector<double> auc_caps{5.0, 15.0, 30.0};
  double auc_step = kDefaultAucStepDeg;
};

inline std::string format_threshold(double x) {
  if (x == std::floor(x)) return std::to_string(static_cast<std::int64_t>(x));
  std::string s = std::to_string(x);
  while (!s.empty() && s.back() == '0') s.pop_back();
  return s;
}

/// RAcc_x / TAcc_x / Acc_x for each threshold and AUC@cap for each cap.
inline std::map<std::string, double> camera_metrics(const PairErrorSet& errs,
                                                    const PoseMetricOptions& opts = {}) {
  std::map<std::string, double> m;
  for (const double x : opts.accuracy_thresholds) {
    const auto tag = format_threshold(x);
    m["RAcc_" + tag] = accuracy_at(errs, x, AccuracyKind::Rotation);
    m["TAcc_" + tag] = accuracy_at(errs, x, AccuracyKind::Translation);
    m["Acc_" + tag] = accuracy_at(errs, x, AccuracyKind::Joint);
  }
  for (const double cap : opts.auc_caps) {
    m["AUC@" + format_threshold(cap)] = auc(errs, cap, opts.auc_step);
  }
  return m;
}

}  // namespace geoeval
