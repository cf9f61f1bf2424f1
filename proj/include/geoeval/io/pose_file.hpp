#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "geoeval/error.hpp"
#include "geoeval/geometry.hpp"

namespace geoeval::io {

inline constexpr double kPoseWarnTolerance = 1e-6;
inline constexpr double kPoseRejectTolerance = 1e-3;

struct PoseFile {
  Trajectory trajectory{PoseConvention::CameraToWorld};
  /// Frames whose rotation drifted past kPoseWarnTolerance and was
  /// re-orthonormalized.
  std::vector<std::int64_t> reorthonormalized;
};

/// One "frame r00 r01 r02 t0 r10 r11 r12 t1 r20 r21 r22 t2" line per frame
/// (camera-to-world, row-major 3x4). '#' starts a comment line.
inline PoseFile decode_pose_file(std::istream& in) {
  struct Row {
    std::int64_t frame;
    Mat3 r;
    Vec3 t;
    std::size_t line;
  };
  std::vector<Row> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::vector<std::string> tokens;
    for (std::string tok; ls >> tok;) tokens.push_back(tok);
    if (tokens.size() != 13) {
      throw ParseError("pose file line " + std::to_string(line_no) + ": expected frame index + 12 values, got " +
                       std::to_string(tokens.size()) + " tokens");
    }
    Row row{};
    row.line = line_no;
    const auto& f = tokens[0];
    auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), row.frame);
    if (ec != std::errc() || p != f.data() + f.size() || row.frame < 0) {
      throw ParseError("pose file line " + std::to_string(line_no) + ": bad frame index '" + f + "'");
    }
    double v[12];
    for (int k = 0; k < 12; ++k) {
      try {
        std::size_t used = 0;
        v[k] = std::stod(tokens[static_cast<std::size_t>(k) + 1], &used);
        if (used != tokens[static_cast<std::size_t>(k) + 1].size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ParseError("pose file line " + std::to_string(line_no) + ": bad number '" +
                         tokens[static_cast<std::size_t>(k) + 1] + "'");
      }
    }
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) row.r(r, c) = v[r * 4 + c];
      row.t(r) = v[r * 4 + 3];
    }
    rows.push_back(row);
  }

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.frame < b.frame; });
  PoseFile out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (i > 0 && rows[i - 1].frame == row.frame) {
      throw ParseError("pose file line " + std::to_string(row.line) + ": duplicate frame index " +
                       std::to_string(row.frame));
    }
    const double drift = orthonormality_error(row.r).worst();
    if (!(drift <= kPoseRejectTolerance)) {
      throw ParseError("pose file line " + std::to_string(row.line) +
                       ": rotation is not orthonormal (residual " + std::to_string(drift) + ")");
    }
    Rotation rot;
    if (drift > kPoseWarnTolerance) {
      rot = Rotation::from_matrix(project_to_rotation(row.r));
      out.reorthonormalized.push_back(row.frame);
    } else {
      rot = Rotation::from_matrix(row.r, kPoseWarnTolerance * 4);
    }
    out.trajectory.push_back(row.frame, Pose{rot, row.t, PoseConvention::CameraToWorld});
  }
  return out;
}

/// Writes camera-to-world rows with 17 significant digits.
inline void encode_pose_file(std::ostream& out, const Trajectory& traj) {
  const Trajectory c2w = traj.as(PoseConvention::CameraToWorld);
  out << "# frame r00 r01 r02 t0 r10 r11 r12 t1 r20 r21 r22 t2 (camera-to-world)\n";
  char buf[32];
  for (const auto& e : c2w) {
    out << e.frame;
    const Mat3& r = e.pose.rotation.matrix();
    for (int row = 0; row < 3; ++row) {
      for (int c = 0; c < 4; ++c) {
        const double v = c < 3 ? r(row, c) : e.pose.translation(row);
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << ' ' << buf;
      }
    }
    out << '\n';
  }
}

inline PoseFile read_pose_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return decode_pose_file(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

inline void write_pose_file(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  encode_pose_file(out, traj);
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace geoeval::io
