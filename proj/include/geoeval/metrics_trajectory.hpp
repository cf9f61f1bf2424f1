#pragma once

#include <cmath>
#include <vector>

#include "geoeval/error.hpp"
#include "geoeval/geometry.hpp"

namespace geoeval {

struct TrajectoryAlignment {
  Sim3Transform transform;
  Trajectory aligned;
};

struct RelativePoseError {
  double translation = 0.0;  ///< metres
  double rotation_deg = 0.0;
};

struct TrajectoryReport {
  double ate = 0.0;
  double rpe_t = 0.0;
  double rpe_r = 0.0;
  Sim3Transform alignment;
};

namespace detail {

inline void require_matching(const Trajectory& a, const Trajectory& b) {
  if (a.size() != b.size()) throw InvalidArgument("trajectory lengths differ");
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].frame != b[k].frame) throw InvalidArgument("trajectory frame indices differ");
  }
}

}  // namespace detail

/// Sim(3) fitted on camera centres, then applied to the whole predicted
/// trajectory.
inline TrajectoryAlignment align_trajectory(const Trajectory& pred, const Trajectory& gt) {
  detail::require_matching(pred, gt);
  if (gt.size() < 3) throw DataError("insufficient correspondences");
  const auto src = pred.centers();
  const auto dst = gt.centers();
  TrajectoryAlignment out{solve_sim3(src, dst), Trajectory(pred.convention())};
  out.aligned = apply_sim3(out.transform, pred);
  return out;
}

/// RMS distance between corresponding camera centres.
inline double ate(const Trajectory& aligned, const Trajectory& gt) {
  detail::require_matching(aligned, gt);
  if (gt.empty()) throw InvalidArgument("empty trajectory");
  double sum = 0.0;
  for (std::size_t k = 0; k < gt.size(); ++k) {
    sum += (camera_center(aligned[k].pose) - camera_center(gt[k].pose)).squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(gt.size()));
}

/// Mean translation norm and rotation angle of E_i = (δT*_i)⁻¹ δT̃_i over
/// consecutive entries, with δT_i = P_i⁻¹ P_{i+1} on camera-to-world poses.
inline RelativePoseError rpe(const Trajectory& aligned, const Trajectory& gt) {
  detail::require_matching(aligned, gt);
  if (gt.size() < 2) throw InvalidArgument("RPE needs at least two poses");
  const Trajectory a = aligned.as(PoseConvention::CameraToWorld);
  const Trajectory g = gt.as(PoseConvention::CameraToWorld);

  double t_sum = 0.0;
  double r_sum = 0.0;
  for (std::size_t k = 0; k + 1 < g.size(); ++k) {
    const Mat4 delta_gt = rigid_inverse(g[k].pose.matrix()) * g[k + 1].pose.matrix();
    const Mat4 delta_pred = rigid_inverse(a[k].pose.matrix()) * a[k + 1].pose.matrix();
    const Mat4 err = rigid_inverse(delta_gt) * delta_pred;
    t_sum += err.topRightCorner<3, 1>().norm();
    r_sum += rotation_angle_rad(err.topLeftCorner<3, 3>()) * kRadToDeg;
  }
  const auto windows = static_cast<double>(g.size() - 1);
  return {t_sum / windows, r_sum / windows};
}

inline TrajectoryReport evaluate_trajectory(const Trajectory& pred, const Trajectory& gt) {
  const auto alignment = align_trajectory(pred, gt);
  const auto rel = rpe(alignment.aligned, gt);
  return {ate(alignment.aligned, gt), rel.translation, rel.rotation_deg, alignment.transform};
}

}  // namespace geoeval
