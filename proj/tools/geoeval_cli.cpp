// geoeval command-line interface.
//
//   geoeval sample    --scene-dir D --regime R --config C --out index.json
//   geoeval eval      --index index.json --gt-dir G --pred-dir P --regime R --config C --out report.json
//   geoeval aggregate --reports DIR --filter key=value... --format json|csv|markdown --out table
//   geoeval clean     --depth-dir D --rgb-dir R [--sky-dir S] --config C --out-dir O
//   geoeval fuse      --scene-dir D --depth-dir P --poses F --stride K --out cloud.ply
//
// Exit codes: 0 ok, 1 usage, 2 data error, 3 internal error.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "geoeval/geoeval.hpp"

namespace fs = std::filesystem;
using namespace geoeval;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

EvalConfig read_config(const std::string& path) {
  if (path.empty()) return {};
  return load_config(path);
}

int run_sample(const std::string& scene_dir, const std::string& regime, const std::string& config,
               const std::string& out) {
  const EvalConfig cfg = read_config(config);
  const auto info = io::read_scene_info(scene_dir);
  const GroundTruth gt = io::load_ground_truth(scene_dir);

  std::vector<Regime> regimes;
  if (regime == "all") {
    regimes.assign(kAllRegimes.begin(), kAllRegimes.end());
  } else {
    regimes.push_back(regime_from_string(regime));
  }
  std::vector<std::string> warnings;
  const SceneIndex index = sample_scene(info.scene_id, info.dataset, info.tags, gt, regimes, cfg.sampler,
                                        cfg.threads, regime == "all" ? &warnings : nullptr);
  for (const auto& w : warnings) std::cerr << "warning: regime skipped, " << w << '\n';
  write_scene_index(index, out);
  return kExitOk;
}

int run_eval(const std::string& index_path, const std::string& gt_dir, const std::string& pred_dir,
             const std::string& regime_name, const std::string& config, const std::string& out,
             bool metric_depth, const std::string& method, const std::string& status_name) {
  const EvalConfig cfg = read_config(config);
  const SceneIndex index = load_scene_index(index_path);
  const Regime regime = regime_from_string(regime_name);
  const SceneStatus status = status_from_string(status_name);

  SceneReport report;
  if (status != SceneStatus::Ok) {
    report = failed_report(index, regime, method.empty() ? "unknown" : method, status);
  } else {
    const auto& frames = index.frames(regime);
    const GroundTruth gt = io::load_ground_truth(gt_dir, frames);
    PredictionBundle pred = io::load_prediction(pred_dir, frames);
    if (!method.empty()) pred.method = method;
    if (metric_depth) pred.metric_scale = true;
    report = evaluate_scene(index, regime, gt, pred, cfg);
  }
  write_text_file(out, serialize(report));
  if (report.status == SceneStatus::Error) {
    std::cerr << "error: " << report.message << '\n';
    return kExitData;
  }
  return kExitOk;
}

int run_aggregate(const std::string& reports_dir, const std::vector<std::string>& filters,
                  const std::string& format, const std::string& out) {
  const TagFilter filter = parse_filter(filters);
  if (!fs::is_directory(reports_dir)) throw DataError("reports directory not found: " + reports_dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(reports_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<ReportSummary> summaries;
  for (const auto& f : files) {
    try {
      summaries.push_back(summarize(nlohmann::json::parse(read_text_file(f))));
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(f.string() + ": malformed JSON: " + e.what());
    } catch (const ParseError& e) {
      throw ParseError(f.string() + ": " + e.what());
    }
  }
  const Leaderboard board = aggregate(std::move(summaries), filter);
  std::string text;
  if (format == "json") text = to_json(board).dump(2) + "\n";
  else if (format == "csv") text = to_csv(board);
  else text = to_markdown(board);
  if (out.empty() || out == "-") std::cout << text;
  else write_text_file(out, text);
  return kExitOk;
}

int run_clean(const std::string& depth_dir, const std::string& rgb_dir, const std::string& sky_dir,
              const std::string& config, const std::string& out_dir) {
  const EvalConfig cfg = read_config(config);
  if (!fs::is_directory(depth_dir)) throw DataError("depth directory not found: " + depth_dir);
  fs::create_directories(out_dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(depth_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pfm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  nlohmann::json stats = nlohmann::json::object();
  for (const auto& f : files) {
    const std::string stem = f.stem().string();
    const DepthFrame depth = io::read_depth(f);
    const ColorImage rgb = io::read_color_image(fs::path(rgb_dir) / (stem + ".png"));
    std::optional<Mask> sky;
    if (!sky_dir.empty()) sky = io::read_mask_image(fs::path(sky_dir) / (stem + ".png"));
    const CleanResult res = clean_pipeline(depth, rgb, sky, cfg.clean);
    io::write_depth(fs::path(out_dir) / (stem + ".pfm"), res.frame);
    io::write_mask_image(fs::path(out_dir) / (stem + "_mask.png"), res.frame.mask);
    nlohmann::json counts = nlohmann::json::object();
    for (std::size_t k = 0; k < kCleanStageCount; ++k) {
      counts[to_string(static_cast<CleanStage>(k))] = res.invalidated[k];
    }
    counts["valid"] = res.frame.valid_count();
    stats[stem] = counts;
  }
  write_text_file(fs::path(out_dir) / "clean_stats.json", stats.dump(2) + "\n");
  return kExitOk;
}

int run_fuse(const std::string& scene_dir, const std::string& depth_dir, const std::string& poses,
             int stride, const std::string& out) {
  const auto info = io::read_scene_info(scene_dir);
  const auto traj = io::read_pose_file(poses).trajectory;
  std::vector<PosedDepthFrame> frames;
  for (const auto& e : traj) {
    const fs::path p = fs::path(depth_dir) / io::frame_file_name(e.frame);
    if (!fs::exists(p)) continue;
    frames.push_back({io::read_depth(p), e.pose, info.intrinsics});
  }
  if (frames.empty()) throw DataError("no depth files match the pose file");
  io::write_ply(out, fuse_depth_maps(frames, stride));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometry evaluation toolkit: frame sampling, metrics, depth cleaning"};
  app.require_subcommand(1);

  const std::vector<std::string> regime_names = {"single", "sparse", "medium", "dense"};
  std::vector<std::string> sample_regimes = regime_names;
  sample_regimes.push_back("all");

  std::string scene_dir, regime, config, out;
  auto* sample = app.add_subcommand("sample", "Select frame indices for each density regime");
  sample->add_option("--scene-dir", scene_dir, "Ground-truth scene directory")->required();
  sample->add_option("--regime", regime, "Regime to sample")->required()->check(CLI::IsMember(sample_regimes));
  sample->add_option("--config", config, "JSON configuration file");
  sample->add_option("--out", out, "Output scene index JSON")->required();

  std::string index_path, gt_dir, pred_dir, method, status = "ok";
  bool metric_depth = false;
  auto* eval = app.add_subcommand("eval", "Evaluate one method on one scene and regime");
  eval->add_option("--index", index_path, "Scene index JSON")->required();
  eval->add_option("--gt-dir", gt_dir, "Ground-truth scene directory")->required();
  eval->add_option("--pred-dir", pred_dir, "Prediction directory");
  eval->add_option("--regime", regime, "Regime to evaluate")->required()->check(CLI::IsMember(regime_names));
  eval->add_option("--config", config, "JSON configuration file");
  eval->add_option("--out", out, "Output report JSON")->required();
  eval->add_flag("--metric-depth", metric_depth, "Also score depth without median alignment");
  eval->add_option("--method", method, "Method name (overrides prediction.json)");
  eval->add_option("--status", status, "Record a failed run instead of evaluating")
      ->check(CLI::IsMember({"ok", "oom", "timeout", "error"}));

  std::string reports_dir, format = "markdown";
  std::vector<std::string> filters;
  auto* agg = app.add_subcommand("aggregate", "Aggregate scene reports into a leaderboard");
  agg->add_option("--reports", reports_dir, "Directory of report JSON files")->required();
  agg->add_option("--filter", filters, "key=value conditions (tag axes, dataset, method, regime)");
  agg->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv", "markdown"}));
  agg->add_option("--out", out, "Output file ('-' for stdout)");

  std::string depth_dir, rgb_dir, sky_dir, out_dir;
  auto* clean = app.add_subcommand("clean", "Run the depth cleaning pipeline over a directory");
  clean->add_option("--depth-dir", depth_dir, "Directory of PFM depth maps")->required();
  clean->add_option("--rgb-dir", rgb_dir, "Directory of RGB PNG guides (same stems)")->required();
  clean->add_option("--sky-dir", sky_dir, "Directory of sky mask PNGs (same stems)");
  clean->add_option("--config", config, "JSON configuration file");
  clean->add_option("--out-dir", out_dir, "Output directory")->required();

  std::string poses;
  int stride = 1;
  auto* fuse = app.add_subcommand("fuse", "Unproject depth maps into one point cloud");
  fuse->add_option("--scene-dir", scene_dir, "Scene directory providing intrinsics")->required();
  fuse->add_option("--depth-dir", depth_dir, "Directory of PFM depth maps")->required();
  fuse->add_option("--poses", poses, "Camera-to-world pose file")->required();
  fuse->add_option("--stride", stride, "Pixel stride")->check(CLI::PositiveNumber);
  fuse->add_option("--out", out, "Output PLY")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*sample) return run_sample(scene_dir, regime, config, out);
    if (*eval) {
      if (status == "ok" && pred_dir.empty()) {
        std::cerr << "error: --pred-dir is required unless --status records a failure\n";
        return kExitUsage;
      }
      return run_eval(index_path, gt_dir, pred_dir, regime, config, out, metric_depth, method, status);
    }
    if (*agg) return run_aggregate(reports_dir, filters, format, out);
    if (*clean) return run_clean(depth_dir, rgb_dir, sky_dir, config, out_dir);
    if (*fuse) return run_fuse(scene_dir, depth_dir, poses, stride, out);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const geoeval::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}
