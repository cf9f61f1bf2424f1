#pragma once

// On-disk layout of a scene (ground truth) and of a method's predictions:
//
//   <scene>/scene.json        {"scene_id", "dataset", "tags", "intrinsics"}
//   <scene>/poses.txt         camera-to-world pose file, frames 0..N-1
//   <scene>/depth/NNNNNN.pfm  metric depth, NaN = invalid
//   <scene>/pointcloud.ply    optional reference cloud
//
//   <pred>/prediction.json    optional {"method", "metric_scale"}
//   <pred>/poses.txt          camera-to-world pose file
//   <pred>/depth/NNNNNN.pfm
//   <pred>/pointcloud.ply     optional

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "geoeval/error.hpp"
#include "geoeval/harness.hpp"
#include "geoeval/io/pfm.hpp"
#include "geoeval/io/ply.hpp"
#include "geoeval/io/pose_file.hpp"
#include "geoeval/io/scene_index.hpp"

namespace geoeval::io {

namespace fs = std::filesystem;

inline std::string frame_file_name(std::int64_t frame, const char* ext = ".pfm") {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06lld%s", static_cast<long long>(frame), ext);
  return buf;
}

struct SceneInfo {
  std::string scene_id;
  std::string dataset;
  SceneTags tags;
  Intrinsics intrinsics;
};

inline nlohmann::json to_json(const Intrinsics& k) {
  return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
}

inline Intrinsics intrinsics_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("intrinsics: expected an object");
  geoeval::detail::reject_unknown_keys(j, {"fx", "fy", "cx", "cy", "width", "height"}, "intrinsics");
  Intrinsics k;
  try {
    k.fx = j.at("fx").get<double>();
    k.fy = j.at("fy").get<double>();
    k.cx = j.at("cx").get<double>();
    k.cy = j.at("cy").get<double>();
    k.width = j.at("width").get<int>();
    k.height = j.at("height").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("intrinsics: ") + e.what());
  }
  try {
    k.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("intrinsics: ") + e.what());
  }
  return k;
}

inline SceneInfo read_scene_info(const fs::path& dir) {
  const fs::path file = dir / "scene.json";
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(file));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(file.string() + ": malformed JSON: " + e.what());
  }
  try {
    if (!j.is_object()) throw ParseError("expected an object");
    geoeval::detail::reject_unknown_keys(j, {"scene_id", "dataset", "tags", "intrinsics"}, "scene");
    SceneInfo info;
    info.scene_id = geoeval::detail::require_string(j, "scene_id", "scene");
    info.dataset = geoeval::detail::require_string(j, "dataset", "scene");
    info.tags = tags_from_json(geoeval::detail::require_key(j, "tags", "scene"));
    info.intrinsics = intrinsics_from_json(geoeval::detail::require_key(j, "intrinsics", "scene"));
    return info;
  } catch (const ParseError& e) {
    throw ParseError(file.string() + ": " + e.what());
  }
}

inline void write_scene_info(const fs::path& dir, const SceneInfo& info) {
  const nlohmann::json j = {{"scene_id", info.scene_id},
                            {"dataset", info.dataset},
                            {"tags", tags_to_json(info.tags)},
                            {"intrinsics", to_json(info.intrinsics)}};
  write_text_file(dir / "scene.json", j.dump(2) + "\n");
}

/// Loads depth for `frames`, or every frame in the pose file when empty.
inline GroundTruth load_ground_truth(const fs::path& dir, std::span<const std::int64_t> frames = {}) {
  GroundTruth gt;
  gt.intrinsics = read_scene_info(dir).intrinsics;
  gt.poses = read_pose_file(dir / "poses.txt").trajectory;
  const auto all = gt.poses.frames();
  for (std::size_t k = 0; k < all.size(); ++k) {
    if (all[k] != static_cast<std::int64_t>(k)) {
      throw DataError(dir.string() + ": ground-truth frames must be numbered 0..N-1");
    }
  }
  const std::vector<std::int64_t> wanted = frames.empty() ? all : std::vector<std::int64_t>(frames.begin(), frames.end());
  for (const auto f : wanted) {
    const fs::path p = dir / "depth" / frame_file_name(f);
    if (!fs::exists(p)) throw DataError("ground truth missing " + p.string());
    gt.depth.emplace(f, read_depth(p));
  }
  if (fs::exists(dir / "pointcloud.ply")) gt.cloud = read_ply(dir / "pointcloud.ply");
  return gt;
}

/// Missing per-frame files are tolerated here; evaluate_scene reports them.
inline PredictionBundle load_prediction(const fs::path& dir, std::span<const std::int64_t> frames) {
  if (!fs::is_directory(dir)) throw DataError("prediction directory not found: " + dir.string());
  PredictionBundle pred;
  const fs::path meta = dir / "prediction.json";
  if (fs::exists(meta)) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_text_file(meta));
      geoeval::detail::reject_unknown_keys(j, {"method", "metric_scale"}, "prediction");
      if (j.contains("method")) pred.method = j.at("method").get<std::string>();
      if (j.contains("metric_scale")) pred.metric_scale = j.at("metric_scale").get<bool>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(meta.string() + ": " + e.what());
    }
  } else {
    pred.method = fs::absolute(dir).lexically_normal().filename().string();
  }
  if (fs::exists(dir / "poses.txt")) pred.poses = read_pose_file(dir / "poses.txt").trajectory;
  for (const auto f : frames) {
    const fs::path p = dir / "depth" / frame_file_name(f);
    if (fs::exists(p)) pred.depth.emplace(f, read_depth(p));
  }
  if (fs::exists(dir / "pointcloud.ply")) pred.cloud = read_ply(dir / "pointcloud.ply");
  return pred;
}

/// Writes a ground-truth scene directory (used by fixtures and tooling).
inline void write_ground_truth(const fs::path& dir, const SceneInfo& info, const GroundTruth& gt) {
  fs::create_directories(dir / "depth");
  write_scene_info(dir, info);
  write_pose_file(dir / "poses.txt", gt.poses);
  for (const auto& [f, d] : gt.depth) write_depth(dir / "depth" / frame_file_name(f), d);
  if (gt.cloud) write_ply(dir / "pointcloud.ply", *gt.cloud);
}

inline void write_prediction(const fs::path& dir, const PredictionBundle& pred) {
  fs::create_directories(dir / "depth");
  write_text_file(dir / "prediction.json",
                  nlohmann::json{{"method", pred.method}, {"metric_scale", pred.metric_scale}}.dump(2) + "\n");
  if (pred.poses) write_pose_file(dir / "poses.txt", *pred.poses);
  for (const auto& [f, d] : pred.depth) write_depth(dir / "depth" / frame_file_name(f), d);
  if (pred.cloud) write_ply(dir / "pointcloud.ply", *pred.cloud);
}

}  // namespace geoeval::io
