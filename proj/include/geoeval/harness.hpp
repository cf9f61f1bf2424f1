#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "geoeval/config.hpp"
#include "geoeval/error.hpp"
#include "geoeval/geometry.hpp"
#include "geoeval/io/scene_index.hpp"
#include "geoeval/metrics_depth.hpp"
#include "geoeval/metrics_pose.hpp"
#include "geoeval/metrics_recon.hpp"
#include "geoeval/metrics_trajectory.hpp"
#include "geoeval/sampling.hpp"

namespace geoeval {

/// Ground truth of one scene, in memory.
struct GroundTruth {
  Intrinsics intrinsics;
  Trajectory poses{PoseConvention::CameraToWorld};
  std::map<std::int64_t, DepthFrame> depth;
  std::optional<PointCloud> cloud;
};

/// A method's outputs for one scene.
struct PredictionBundle {
  std::string method = "unknown";
  std::map<std::int64_t, DepthFrame> depth;
  std::optional<Trajectory> poses;
  std::optional<PointCloud> cloud;
  bool metric_scale = false;
};

enum class SceneStatus { Ok, Oom, Timeout, Error };

inline std::string to_string(SceneStatus s) {
  switch (s) {
    case SceneStatus::Ok: return "ok";
    case SceneStatus::Oom: return "oom";
    case SceneStatus::Timeout: return "timeout";
    case SceneStatus::Error: return "error";
  }
  return "?";
}

inline SceneStatus status_from_string(const std::string& s) {
  if (s == "ok") return SceneStatus::Ok;
  if (s == "oom") return SceneStatus::Oom;
  if (s == "timeout") return SceneStatus::Timeout;
  if (s == "error") return SceneStatus::Error;
  throw InvalidArgument("unknown scene status '" + s + "'");
}

/// Outcome of evaluating one (method, scene, regime). Metric groups are
/// present only for status ok.
struct SceneReport {
  std::string scene_id;
  std::string dataset;
  SceneTags tags;
  std::string method;
  Regime regime = Regime::Single;
  SceneStatus status = SceneStatus::Ok;
  std::string message;
  std::vector<std::int64_t> missing_frames;

  std::optional<SceneDepthMetrics> depth;
  std::optional<SceneDepthMetrics> depth_metric;
  std::vector<std::int64_t> depth_frames;
  std::optional<std::map<std::string, double>> camera;
  std::optional<TrajectoryReport> trajectory;
  std::optional<ReconMetrics> recon;
};

/// A report that carries no metrics, e.g. for a run that ran out of memory.
inline SceneReport failed_report(const SceneIndex& index, Regime regime, const std::string& method,
                                 SceneStatus status, std::string message = {}) {
  SceneReport r;
  r.scene_id = index.scene_id;
  r.dataset = index.dataset;
  r.tags = index.tags;
  r.method = method;
  r.regime = regime;
  r.status = status;
  r.message = std::move(message);
  return r;
}

/// Selects frames for each requested regime from ground-truth geometry.
/// A regime that cannot be formed (e.g. medium on a scene shorter than its
/// lower budget) is skipped with a note in `warnings` when given, otherwise
/// the error propagates.
inline SceneIndex sample_scene(std::string scene_id, std::string dataset, SceneTags tags,
                               const GroundTruth& gt, std::span<const Regime> regimes,
                               const SamplerConfig& cfg, unsigned threads = 1,
                               std::vector<std::string>* warnings = nullptr) {
  cfg.validate();
  SceneIndex index{std::move(scene_id), std::move(dataset), std::move(tags), {}};
  const auto n = static_cast<std::int64_t>(gt.poses.size());
  if (n < 1) throw DataError("scene has no frames");

  auto posed_frames = [&] {
    std::vector<PosedDepthFrame> frames;
    for (const auto& e : gt.poses) {
      const auto it = gt.depth.find(e.frame);
      if (it == gt.depth.end()) throw DataError("missing depth for frame " + std::to_string(e.frame));
      frames.push_back({it->second, e.pose, gt.intrinsics});
    }
    return frames;
  };
  std::optional<std::vector<PosedDepthFrame>> frames;

  for (const Regime r : regimes) {
    try {
      RegimeSelection sel;
      switch (r) {
        case Regime::Single: sel = select_single(n); break;
        case Regime::Dense: sel = select_dense(n, cfg.dense_budget); break;
        case Regime::Sparse:
          if (!frames) frames = posed_frames();
          sel = select_sparse(build_voxel_support(*frames, cfg.sparse_voxel_size, threads), cfg.sparse_budget);
          break;
        case Regime::Medium:
          (void)cfg.medium_lower(n);
          if (!frames) frames = posed_frames();
          sel = select_medium(build_voxel_support(*frames, cfg.medium_voxel_size(), threads), n, cfg);
          break;
      }
      sel.validate(n);
      index.regimes[r] = std::move(sel.frames);
    } catch (const DataError& e) {
      if (!warnings) throw;
      warnings->push_back(std::string(to_string(r)) + ": " + e.what());
    }
  }
  return index;
}

inline bool has_trajectory_metrics(Regime r) { return r == Regime::Medium || r == Regime::Dense; }

/// Runs every metric family that applies to the regime.
///
/// Depth always (median-aligned; additionally unaligned when the
/// prediction claims metric scale), pairwise camera metrics when at least
/// two frames are selected, trajectory metrics for medium/dense, and
/// reconstruction metrics for medium/dense when both clouds exist.
inline SceneReport evaluate_scene(const SceneIndex& index, Regime regime, const GroundTruth& gt,
                                  const PredictionBundle& pred, const EvalConfig& cfg = {}) {
  const auto& frames = index.frames(regime);
  SceneReport report = failed_report(index, regime, pred.method, SceneStatus::Ok);

  for (const auto f : frames) {
    if (!gt.depth.contains(f)) throw DataError("ground truth lacks depth for frame " + std::to_string(f));
  }
  const bool needs_poses = frames.size() >= 2;
  const Trajectory gt_poses = needs_poses ? gt.poses.subset(frames) : Trajectory();

  const std::vector<std::int64_t> pred_pose_frames =
      pred.poses ? pred.poses->frames() : std::vector<std::int64_t>{};
  for (const auto f : frames) {
    const bool has_depth = pred.depth.contains(f);
    const bool has_pose =
        !needs_poses || std::binary_search(pred_pose_frames.begin(), pred_pose_frames.end(), f);
    if (!has_depth || !has_pose) report.missing_frames.push_back(f);
  }
  if (!report.missing_frames.empty()) {
    report.status = SceneStatus::Error;
    report.message = "prediction is missing " + std::to_string(report.missing_frames.size()) + " frame(s)";
    return report;
  }

  std::vector<DepthFrame> pd;
  std::vector<DepthFrame> gd;
  for (const auto f : frames) {
    pd.push_back(pred.depth.at(f));
    gd.push_back(gt.depth.at(f));
  }
  report.depth_frames = frames;
  report.depth = scene_depth_metrics(pd, gd, DepthMode::MedianAligned, cfg.depth);
  if (pred.metric_scale) report.depth_metric = scene_depth_metrics(pd, gd, DepthMode::Metric, cfg.depth);

  if (!needs_poses) return report;
  const Trajectory pred_poses = pred.poses->subset(frames);
  report.camera = camera_metrics(pairwise_errors(pred_poses, gt_poses), cfg.pose);

  if (!has_trajectory_metrics(regime) || frames.size() < 3) return report;
  report.trajectory = evaluate_trajectory(pred_poses, gt_poses);

  if (gt.cloud && pred.cloud) {
    const PointCloud cloud =
        cfg.recon.align_to_gt ? apply_sim3(report.trajectory->alignment, *pred.cloud) : *pred.cloud;
    report.recon = evaluate_reconstruction(cloud, *gt.cloud, cfg.recon, cfg.threads);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Report serialization

namespace detail {

inline nlohmann::json depth_block(const DepthMetrics& m) {
  nlohmann::json j = {{"AbsRel", m.abs_rel}, {"SqRel", m.sq_rel}, {"RMSE", m.rmse}, {"LogRMSE", m.log_rmse}};
  for (const auto& d : m.deltas) {
    char key[32];
    std::snprintf(key, sizeof(key), "delta_%.2f", d.threshold);
    j[key] = d.value;
  }
  return j;
}

inline nlohmann::json scene_depth_block(const SceneDepthMetrics& m, const std::vector<std::int64_t>& frames) {
  nlohmann::json j = depth_block(m.pooled);
  nlohmann::json per_frame = nlohmann::json::array();
  for (std::size_t k = 0; k < m.per_frame.size(); ++k) {
    nlohmann::json f = depth_block(m.per_frame[k]);
    f["frame"] = k < frames.size() ? frames[k] : static_cast<std::int64_t>(k);
    f["scale"] = m.scales[k];
    f["pixels"] = m.per_frame[k].pixels;
    per_frame.push_back(std::move(f));
  }
  j["details"] = {{"pixels", m.pooled.pixels}, {"per_frame", per_frame}};
  return j;
}

inline nlohmann::json sim3_block(const Sim3Transform& t) {
  const Mat3& r = t.rotation.matrix();
  std::vector<double> rot;
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) rot.push_back(r(i, k));
  }
  return {{"scale", t.scale},
          {"rotation", rot},
          {"translation", {t.translation.x(), t.translation.y(), t.translation.z()}}};
}

}  // namespace detail

inline nlohmann::json to_json(const SceneReport& r) {
  nlohmann::json j = {{"scene_id", r.scene_id},
                      {"dataset", r.dataset},
                      {"tags", tags_to_json(r.tags)},
                      {"method", r.method},
                      {"regime", std::string(to_string(r.regime))},
                      {"status", to_string(r.status)}};
  if (!r.message.empty()) j["message"] = r.message;
  if (!r.missing_frames.empty()) j["missing_frames"] = r.missing_frames;
  if (r.status != SceneStatus::Ok) return j;

  nlohmann::json m = nlohmann::json::object();
  if (r.depth) m["depth"] = detail::scene_depth_block(*r.depth, r.depth_frames);
  if (r.depth_metric) m["depth_metric"] = detail::scene_depth_block(*r.depth_metric, r.depth_frames);
  if (r.camera) m["camera"] = *r.camera;
  if (r.trajectory) {
    m["trajectory"] = {{"ATE", r.trajectory->ate},
                       {"RPE_t", r.trajectory->rpe_t},
                       {"RPE_r", r.trajectory->rpe_r},
                       {"details", {{"alignment", detail::sim3_block(r.trajectory->alignment)}}}};
  }
  if (r.recon) {
    m["recon"] = {{"Precision", r.recon->precision}, {"Recall", r.recon->recall},
                  {"F-score", r.recon->fscore},      {"Acc", r.recon->mean_acc},
                  {"Comp", r.recon->mean_comp},      {"Overall", r.recon->overall}};
  }
  j["metrics"] = m;
  return j;
}

/// Canonical text form: sorted keys, two-space indent, trailing newline.
inline std::string serialize(const SceneReport& r) { return to_json(r).dump(2) + "\n"; }

/// The fields aggregation needs from a serialized report.
struct ReportSummary {
  std::string scene_id;
  std::string dataset;
  SceneTags tags;
  std::string method;
  std::string regime;
  SceneStatus status = SceneStatus::Ok;
  std::map<std::string, double> metrics;  ///< "group.name" -> value
};

/// Flattens numeric leaves of each metric group; "details" is skipped.
inline ReportSummary summarize(const nlohmann::json& j) {
  ReportSummary s;
  try {
    s.scene_id = j.at("scene_id").get<std::string>();
    s.dataset = j.at("dataset").get<std::string>();
    s.tags = tags_from_json(j.at("tags"));
    s.method = j.at("method").get<std::string>();
    s.regime = j.at("regime").get<std::string>();
    s.status = status_from_string(j.at("status").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scene report: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("scene report: ") + e.what());
  }
  regime_from_string(s.regime);
  if (s.status == SceneStatus::Ok && j.contains("metrics")) {
    for (const auto& [group, values] : j.at("metrics").items()) {
      if (!values.is_object()) continue;
      for (const auto& [name, v] : values.items()) {
        if (v.is_number()) s.metrics[group + "." + name] = v.get<double>();
      }
    }
  }
  return s;
}

inline ReportSummary summarize(const SceneReport& r) { return summarize(to_json(r)); }

// ---------------------------------------------------------------------------
// Aggregation

/// key=value conditions, all of which must hold. Keys: a tag axis,
/// "dataset", "method" or "regime".
using TagFilter = std::vector<std::pair<std::string, std::string>>;

inline TagFilter parse_filter(const std::vector<std::string>& exprs) {
  TagFilter f;
  for (const auto& e : exprs) {
    const auto eq = e.find('=');
    if (eq == std::string::npos || eq == 0) throw InvalidArgument("filter must be key=value, got '" + e + "'");
    std::string key = e.substr(0, eq);
    std::string value = e.substr(eq + 1);
    if (is_tag_key(key)) {
      try {
        check_tag(key, value);
      } catch (const ParseError& err) {
        throw InvalidArgument(err.what());
      }
    } else if (key != "dataset" && key != "method" && key != "regime") {
      throw InvalidArgument("unknown filter key '" + key + "'");
    }
    f.emplace_back(std::move(key), std::move(value));
  }
  return f;
}

inline bool matches(const ReportSummary& s, const TagFilter& filter) {
  for (const auto& [key, value] : filter) {
    std::string actual;
    if (key == "dataset") actual = s.dataset;
    else if (key == "method") actual = s.method;
    else if (key == "regime") actual = s.regime;
    else actual = s.tags.get(key).value_or("");
    if (actual != value) return false;
  }
  return true;
}

struct LeaderboardCell {
  std::optional<double> mean;  ///< absent when no scene contributed
  std::size_t scenes = 0;      ///< ok scenes averaged
  std::size_t excluded = 0;    ///< scenes that failed (oom/timeout/error)
  bool partial = false;        ///< mean covers fewer settings than expected
};

inline constexpr const char* kAverageRow = "average";

struct LeaderboardRow {
  std::string method;
  std::string regime;  ///< regime name or "average"
  std::size_t ok_scenes = 0;
  std::map<std::string, std::size_t> excluded;  ///< status -> count
  std::map<std::string, LeaderboardCell> cells;
};

struct Leaderboard {
  TagFilter filter;
  std::vector<std::string> metrics;  ///< union of metric names, sorted
  std::vector<LeaderboardRow> rows;
};

namespace detail {

inline int regime_rank(const std::string& r) {
  if (r == kAverageRow) return static_cast<int>(kAllRegimes.size());
  return static_cast<int>(regime_from_string(r));
}

}  // namespace detail

/// Unweighted per-cell means over ok scenes; failed scenes are counted and
/// flag the cell as partial. Each method also gets an "average" row: the
/// mean of its per-regime cell means, partial when any regime lacks a value
/// or is itself partial. Independent of input order.
inline Leaderboard aggregate(std::vector<ReportSummary> reports, const TagFilter& filter = {}) {
  std::erase_if(reports, [&](const ReportSummary& s) { return !matches(s, filter); });
  std::sort(reports.begin(), reports.end(), [](const ReportSummary& a, const ReportSummary& b) {
    return std::tie(a.method, a.regime, a.dataset, a.scene_id) <
           std::tie(b.method, b.regime, b.dataset, b.scene_id);
  });

  Leaderboard board;
  board.filter = filter;
  if (reports.empty()) return board;

  // Metrics each regime produces for any method; a regime row is judged
  // against these even when all of its own scenes failed.
  std::map<std::string, std::set<std::string>> regime_metrics;
  std::set<std::string> all_metrics;
  for (const auto& r : reports) {
    for (const auto& [name, _] : r.metrics) {
      regime_metrics[r.regime].insert(name);
      all_metrics.insert(name);
    }
  }
  board.metrics.assign(all_metrics.begin(), all_metrics.end());

  using Key = std::pair<std::string, std::string>;
  std::map<Key, std::vector<const ReportSummary*>> groups;
  for (const auto& r : reports) groups[{r.method, r.regime}].push_back(&r);

  std::map<std::string, std::vector<LeaderboardRow>> by_method;
  for (const auto& [key, members] : groups) {
    LeaderboardRow row;
    row.method = key.first;
    row.regime = key.second;
    std::map<std::string, std::pair<double, std::size_t>> sums;
    for (const auto* r : members) {
      if (r->status != SceneStatus::Ok) {
        ++row.excluded[to_string(r->status)];
        continue;
      }
      ++row.ok_scenes;
      for (const auto& [name, v] : r->metrics) {
        auto& s = sums[name];
        s.first += v;
        ++s.second;
      }
    }
    std::size_t excluded = 0;
    for (const auto& [_, n] : row.excluded) excluded += n;
    for (const auto& name : regime_metrics[row.regime]) {
      LeaderboardCell cell;
      cell.excluded = excluded + (row.ok_scenes - (sums.contains(name) ? sums[name].second : 0));
      if (sums.contains(name)) {
        cell.scenes = sums[name].second;
        cell.mean = sums[name].first / static_cast<double>(cell.scenes);
      }
      cell.partial = cell.excluded > 0;
      row.cells[name] = cell;
    }
    by_method[row.method].push_back(std::move(row));
  }

  for (auto& [method, rows] : by_method) {
    std::sort(rows.begin(), rows.end(), [](const LeaderboardRow& a, const LeaderboardRow& b) {
      return detail::regime_rank(a.regime) < detail::regime_rank(b.regime);
    });
    LeaderboardRow avg;
    avg.method = method;
    avg.regime = kAverageRow;
    for (const auto& row : rows) {
      avg.ok_scenes += row.ok_scenes;
      for (const auto& [s, n] : row.excluded) avg.excluded[s] += n;
    }
    for (const auto& name : board.metrics) {
      LeaderboardCell cell;
      double sum = 0.0;
      std::size_t settings = 0;
      bool any_expected = false;
      for (const auto& row : rows) {
        const auto it = row.cells.find(name);
        if (it == row.cells.end()) continue;
        any_expected = true;
        cell.scenes += it->second.scenes;
        cell.excluded += it->second.excluded;
        if (it->second.partial || !it->second.mean) cell.partial = true;
        if (it->second.mean) {
          sum += *it->second.mean;
          ++settings;
        }
      }
      if (!any_expected) continue;
      if (settings > 0) cell.mean = sum / static_cast<double>(settings);
      avg.cells[name] = cell;
    }
    for (auto& row : rows) board.rows.push_back(std::move(row));
    board.rows.push_back(std::move(avg));
  }
  return board;
}

// ---------------------------------------------------------------------------
// Rendering

inline nlohmann::json to_json(const Leaderboard& b) {
  nlohmann::json filter = nlohmann::json::object();
  for (const auto& [k, v] : b.filter) filter[k] = v;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : b.rows) {
    nlohmann::json cells = nlohmann::json::object();
    for (const auto& [name, c] : r.cells) {
      cells[name] = {{"mean", c.mean ? nlohmann::json(*c.mean) : nlohmann::json(nullptr)},
                     {"scenes", c.scenes},
                     {"excluded", c.excluded},
                     {"partial", c.partial}};
    }
    rows.push_back({{"method", r.method},
                    {"regime", r.regime},
                    {"ok_scenes", r.ok_scenes},
                    {"excluded", r.excluded},
                    {"cells", cells}});
  }
  return {{"filter", filter}, {"metrics", b.metrics}, {"rows", rows}};
}

namespace detail {

inline std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

/// "OOM", "Timeout" or "Error" for a row whose scenes all failed.
inline std::string failure_label(const LeaderboardRow& r) {
  std::string best;
  std::size_t n = 0;
  for (const auto& [status, count] : r.excluded) {
    if (count > n) {
      best = status;
      n = count;
    }
  }
  if (best == "oom") return "OOM";
  if (best == "timeout") return "Timeout";
  if (best == "error") return "Error";
  return "-";
}

}  // namespace detail

/// Long format: one line per (row, metric).
inline std::string to_csv(const Leaderboard& b) {
  std::ostringstream out;
  out << "method,regime,metric,mean,scenes,excluded,partial\n";
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (const char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  char buf[40];
  for (const auto& r : b.rows) {
    for (const auto& [name, c] : r.cells) {
      std::string mean;
      if (c.mean) {
        std::snprintf(buf, sizeof(buf), "%.17g", *c.mean);
        mean = buf;
      }
      out << quote(r.method) << ',' << r.regime << ',' << quote(name) << ',' << mean << ',' << c.scenes << ','
          << c.excluded << ',' << (c.partial ? "true" : "false") << '\n';
    }
  }
  return out.str();
}

/// Wide table; partial means are parenthesized and fully failed cells show
/// the failure kind.
inline std::string to_markdown(const Leaderboard& b) {
  std::ostringstream out;
  out << "| Method | Regime |";
  for (const auto& m : b.metrics) out << ' ' << m << " |";
  out << "\n|---|---|";
  for (std::size_t k = 0; k < b.metrics.size(); ++k) out << "---|";
  out << '\n';
  for (const auto& r : b.rows) {
    out << "| " << r.method << " | " << r.regime << " |";
    for (const auto& m : b.metrics) {
      const auto it = r.cells.find(m);
      std::string text = "";
      if (it != r.cells.end()) {
        if (!it->second.mean) text = detail::failure_label(r);
        else if (it->second.partial) text = "(" + detail::format_value(*it->second.mean) + ")";
        else text = detail::format_value(*it->second.mean);
      }
      out << ' ' << text << " |";
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace geoeval
