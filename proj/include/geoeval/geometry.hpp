#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geoeval/error.hpp"

namespace geoeval {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;
inline constexpr double kDegToRad = std::numbers::pi / 180.0;

/// Orthonormality residual ||RᵀR - I||_F together with |det R - 1|.
struct OrthonormalityError {
  double frobenius = 0.0;
  double determinant = 0.0;
  [[nodiscard]] double worst() const { return std::max(frobenius, determinant); }
};

inline OrthonormalityError orthonormality_error(const Mat3& m) {
  return {(m.transpose() * m - Mat3::Identity()).norm(), std::abs(m.determinant() - 1.0)};
}

/// Closest rotation in the Frobenius sense (SVD projection onto SO(3)).
inline Mat3 project_to_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

/// An element of SO(3). Construction through `from_matrix` checks the
/// orthonormality invariant; arithmetic between rotations stays unchecked.
class Rotation {
 public:
  static constexpr double kTolerance = 1e-9;

  Rotation() : m_(Mat3::Identity()) {}

  static Rotation from_matrix(const Mat3& m, double tolerance = kTolerance) {
    const auto err = orthonormality_error(m);
    if (!(err.frobenius < tolerance) || !(err.determinant < tolerance)) {
      throw InvalidArgument("matrix is not a rotation (orthonormality residual " +
                            std::to_string(err.worst()) + ")");
    }
    return Rotation(m);
  }

  /// Axis-angle constructor; the axis is normalized internally.
  static Rotation from_axis_angle(const Vec3& axis, double radians) {
    if (!(axis.norm() > 0.0)) throw InvalidArgument("rotation axis must be non-zero");
    return Rotation(Eigen::AngleAxisd(radians, axis.normalized()).toRotationMatrix());
  }

  static Rotation from_quaternion(const Eigen::Quaterniond& q) {
    return Rotation(q.normalized().toRotationMatrix());
  }

  [[nodiscard]] const Mat3& matrix() const { return m_; }
  [[nodiscard]] Rotation inverse() const { return Rotation(m_.transpose()); }
  [[nodiscard]] Vec3 operator*(const Vec3& v) const { return m_ * v; }
  [[nodiscard]] Rotation operator*(const Rotation& other) const { return Rotation(m_ * other.m_); }

  friend bool operator==(const Rotation& a, const Rotation& b) { return a.m_ == b.m_; }

 private:
  explicit Rotation(const Mat3& m) : m_(m) {}
  Mat3 m_;
};

enum class PoseConvention { WorldToCamera, CameraToWorld };

/// Rigid transform [R | t]. The convention says which way it maps.
struct Pose {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();
  PoseConvention convention = PoseConvention::WorldToCamera;

  /// Same physical camera expressed in the requested convention.
  [[nodiscard]] Pose as(PoseConvention target) const {
    if (target == convention) return *this;
    const Rotation inv = rotation.inverse();
    return Pose{inv, -(inv * translation), target};
  }

  [[nodiscard]] Mat4 matrix() const {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = rotation.matrix();
    m.topRightCorner<3, 1>() = translation;
    return m;
  }
};

/// Inverse of a homogeneous rigid transform.
inline Mat4 rigid_inverse(const Mat4& m) {
  Mat4 out = Mat4::Identity();
  const Mat3 rt = m.topLeftCorner<3, 3>().transpose();
  out.topLeftCorner<3, 3>() = rt;
  out.topRightCorner<3, 1>() = -(rt * m.topRightCorner<3, 1>());
  return out;
}

/// Camera centre in world coordinates.
inline Vec3 camera_center(const Pose& p) {
  if (p.convention == PoseConvention::CameraToWorld) return p.translation;
  return -(p.rotation.matrix().transpose() * p.translation);
}

/// Angle of a rotation matrix in radians, in [0, pi].
///
/// Equivalent to arccos(clamp((tr R - 1) / 2, -1, 1)); the sine component
/// from the skew part keeps it accurate near 0 and pi where arccos loses
/// half of the available digits.
inline double rotation_angle_rad(const Mat3& r) {
  const double c = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
  const Vec3 axis(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double s = std::min(axis.norm() / 2.0, 1.0);
  return std::atan2(s, c);
}

/// Geodesic distance on SO(3), degrees in [0, 180].
inline double geodesic_angle_deg(const Rotation& a, const Rotation& b) {
  return rotation_angle_rad(a.matrix().transpose() * b.matrix()) * kRadToDeg;
}

/// Rotation taking camera i's frame to camera j's frame: R_j R_iᵀ.
inline Rotation relative_rotation(const Pose& gi, const Pose& gj) {
  if (gi.convention != PoseConvention::WorldToCamera ||
      gj.convention != PoseConvention::WorldToCamera) {
    throw InvalidArgument("relative_rotation expects world-to-camera poses");
  }
  return gj.rotation * gi.rotation.inverse();
}

inline constexpr double kDegenerateBaseline = 1e-8;

/// Translation of the relative pose G_j G_i⁻¹, normalized. std::nullopt for
/// baselines shorter than kDegenerateBaseline metres.
inline std::optional<Vec3> relative_translation_direction(const Pose& gi, const Pose& gj) {
  if (gi.convention != PoseConvention::WorldToCamera ||
      gj.convention != PoseConvention::WorldToCamera) {
    throw InvalidArgument("relative_translation_direction expects world-to-camera poses");
  }
  const Vec3 t = gj.translation - relative_rotation(gi, gj) * gi.translation;
  const double n = t.norm();
  if (!(n >= kDegenerateBaseline)) return std::nullopt;
  return Vec3(t / n);
}

/// Similarity transform x -> s R x + t.
struct Sim3Transform {
  double scale = 1.0;
  Rotation rotation;
  Vec3 translation = Vec3::Zero();

  [[nodiscard]] Vec3 apply(const Vec3& x) const {
    return scale * (rotation * x) + translation;
  }

  [[nodiscard]] Sim3Transform inverse() const {
    const Rotation rinv = rotation.inverse();
    return {1.0 / scale, rinv, -(rinv * translation) / scale};
  }

  /// (*this ∘ other)(x) = this->apply(other.apply(x)).
  [[nodiscard]] Sim3Transform compose(const Sim3Transform& other) const {
    return {scale * other.scale, rotation * other.rotation,
            scale * (rotation * other.translation) + translation};
  }
};

/// Pinhole camera with zero skew.
struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  void validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) throw InvalidArgument("focal lengths must be positive");
    if (width <= 0 || height <= 0) throw InvalidArgument("image size must be positive");
    if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
      throw InvalidArgument("principal point outside the image");
    }
  }

  /// Camera-frame point for pixel (u, v) at metric depth d.
  [[nodiscard]] Vec3 unproject(double u, double v, double d) const {
    return {(u - cx) * d / fx, (v - cy) * d / fy, d};
  }
};

struct PointCloud {
  std::vector<Vec3> points;

  [[nodiscard]] std::size_t size() const { return points.size(); }
  [[nodiscard]] bool empty() const { return points.empty(); }
};

struct TrajectoryEntry {
  std::int64_t frame = 0;
  Pose pose;
};

/// Time-ordered poses sharing one convention.
class Trajectory {
 public:
  explicit Trajectory(PoseConvention convention = PoseConvention::WorldToCamera)
      : convention_(convention) {}

  void push_back(std::int64_t frame, Pose pose) {
    if (pose.convention != convention_) pose = pose.as(convention_);
    if (!entries_.empty() && frame <= entries_.back().frame) {
      throw InvalidArgument("trajectory frame indices must be strictly increasing");
    }
    entries_.push_back({frame, pose});
  }

  [[nodiscard]] PoseConvention convention() const { return convention_; }
  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  [[nodiscard]] bool empty() const { return entries_.empty(); }
  [[nodiscard]] const TrajectoryEntry& operator[](std::size_t i) const { return entries_[i]; }
  [[nodiscard]] const std::vector<TrajectoryEntry>& entries() const { return entries_; }
  [[nodiscard]] auto begin() const { return entries_.begin(); }
  [[nodiscard]] auto end() const { return entries_.end(); }

  [[nodiscard]] Trajectory as(PoseConvention target) const {
    Trajectory out(target);
    out.entries_.reserve(entries_.size());
    for (const auto& e : entries_) out.entries_.push_back({e.frame, e.pose.as(target)});
    return out;
  }

  [[nodiscard]] std::vector<Vec3> centers() const {
    std::vector<Vec3> c;
    c.reserve(entries_.size());
    for (const auto& e : entries_) c.push_back(camera_center(e.pose));
    return c;
  }

  [[nodiscard]] std::vector<std::int64_t> frames() const {
    std::vector<std::int64_t> f;
    f.reserve(entries_.size());
    for (const auto& e : entries_) f.push_back(e.frame);
    return f;
  }

  /// Entries whose frame index appears in `frames` (which must be sorted).
  [[nodiscard]] Trajectory subset(std::span<const std::int64_t> frames) const {
    Trajectory out(convention_);
    std::size_t j = 0;
    for (const std::int64_t f : frames) {
      while (j < entries_.size() && entries_[j].frame < f) ++j;
      if (j == entries_.size() || entries_[j].frame != f) {
        throw DataError("trajectory has no pose for frame " + std::to_string(f));
      }
      out.entries_.push_back(entries_[j]);
    }
    return out;
  }

 private:
  PoseConvention convention_;
  std::vector<TrajectoryEntry> entries_;
};

/// Closed-form least-squares similarity (Umeyama): argmin Σ‖s R x_i + t − y_i‖².
inline Sim3Transform solve_sim3(std::span<const Vec3> source, std::span<const Vec3> target) {
  if (source.size() != target.size()) {
    throw InvalidArgument("solve_sim3: source and target sizes differ");
  }
  const std::size_t n = source.size();
  if (n < 3) throw DataError("insufficient correspondences");

  Vec3 mu_x = Vec3::Zero();
  Vec3 mu_y = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    mu_x += source[i];
    mu_y += target[i];
  }
  mu_x /= static_cast<double>(n);
  mu_y /= static_cast<double>(n);

  double var_x = 0.0;
  Mat3 cov = Mat3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 dx = source[i] - mu_x;
    var_x += dx.squaredNorm();
    cov += (target[i] - mu_y) * dx.transpose();
  }
  var_x /= static_cast<double>(n);
  cov /= static_cast<double>(n);

  const double extent = std::max(1.0, mu_x.squaredNorm());
  if (!(var_x > 1e-24 * extent)) throw DataError("degenerate point set");

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  Vec3 sign = Vec3::Ones();
  if (u.determinant() * v.determinant() < 0.0) sign(2) = -1.0;

  const Mat3 r = u * sign.asDiagonal() * v.transpose();
  const double scale = svd.singularValues().dot(sign) / var_x;
  if (!(scale > 0.0)) throw DataError("degenerate point set (target collapses to a point)");

  Sim3Transform out;
  out.scale = scale;
  out.rotation = Rotation::from_matrix(project_to_rotation(r));
  out.translation = mu_y - scale * (out.rotation * mu_x);
  return out;
}

inline PointCloud apply_sim3(const Sim3Transform& t, const PointCloud& cloud) {
  PointCloud out;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) out.points.push_back(t.apply(p));
  return out;
}

/// Maps every camera into the transformed world: camera-to-world orientation
/// is left-composed with R, centres follow the similarity.
inline Pose apply_sim3(const Sim3Transform& t, const Pose& pose) {
  const Pose c2w = pose.as(PoseConvention::CameraToWorld);
  const Pose moved{t.rotation * c2w.rotation, t.apply(c2w.translation),
                   PoseConvention::CameraToWorld};
  return moved.as(pose.convention);
}

inline Trajectory apply_sim3(const Sim3Transform& t, const Trajectory& traj) {
  Trajectory out(traj.convention());
  for (const auto& e : traj) out.push_back(e.frame, apply_sim3(t, e.pose));
  return out;
}

}  // namespace geoeval
