// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "clean_fixture.hpp"
#include "oracles.hpp"
#include "payloads.hpp"
#include "synthetic.hpp"

using namespace geoeval;
using fixture::Rng;
namespace fs = std::filesystem;

namespace {

class Check {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (!ok && first_failure_.empty()) first_failure_ = what;
    if (!ok) ++failures_;
  }
  void near(double got, double want, double tol, const std::string& what) {
    std::ostringstream s;
    s.precision(17);
    s << what << ": got " << got << ", want " << want << " +- " << tol;
    expect(std::abs(got - want) <= tol, s.str());
  }
  void below(double got, double limit, const std::string& what) {
    std::ostringstream s;
    s.precision(17);
    s << what << ": " << got << " >= " << limit;
    expect(got < limit, s.str());
  }

  [[nodiscard]] bool ok() const { return failures_ == 0; }
  [[nodiscard]] std::string summary() const {
    if (ok()) return std::to_string(checks_) + " checks";
    return std::to_string(failures_) + "/" + std::to_string(checks_) + " checks failed; first: " + first_failure_;
  }

 private:
  std::size_t checks_ = 0;
  std::size_t failures_ = 0;
  std::string first_failure_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SceneIndex dense_index(const fixture::SyntheticScene& s) {
  SceneIndex idx{s.info.scene_id, s.info.dataset, s.info.tags, {}};
  std::vector<std::int64_t> all(s.gt.poses.size());
  std::iota(all.begin(), all.end(), 0);
  idx.regimes[Regime::Dense] = all;
  return idx;
}

void perfect_prediction(Check& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto scene = fixture::box_room_scene(10);
  const auto r = evaluate_scene(dense_index(scene), Regime::Dense, scene.gt, fixture::perfect_prediction(scene.gt));
  const double elapsed = seconds_since(t0);

  c.expect(r.status == SceneStatus::Ok, "status ok");
  c.expect(r.depth && r.depth_metric && r.camera && r.trajectory && r.recon, "all metric groups present");
  if (!c.ok()) return;
  for (const auto* d : {&*r.depth, &*r.depth_metric}) {
    c.near(d->pooled.abs_rel, 0.0, 1e-12, "AbsRel");
    for (const auto& delta : d->pooled.deltas) c.near(delta.value, 1.0, 1e-12, "delta");
  }
  c.near(r.camera->at("RAcc_3"), 1.0, 1e-12, "RAcc_3");
  c.near(r.camera->at("TAcc_3"), 1.0, 1e-12, "TAcc_3");
  c.near(r.camera->at("AUC@30"), 1.0, 1e-12, "AUC@30");
  c.near(r.trajectory->ate, 0.0, 1e-9, "ATE");
  c.near(r.trajectory->rpe_t, 0.0, 1e-9, "RPE_t");
  c.near(r.trajectory->rpe_r, 0.0, 1e-9, "RPE_r");
  c.expect(EvalConfig{}.recon.distance_threshold == 0.05, "d_tau default 0.05");
  c.near(r.recon->fscore, 1.0, 1e-12, "F-score");
  c.below(elapsed, 1.0, "runtime [s]");
}

void sim3_recovery(Check& c) {
  Rng rng(101);
  double worst_time = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto gt = fixture::random_trajectory(rng, 100);
    const auto g = fixture::random_sim3(rng, 0.1, 10.0);
    const auto pred = apply_sim3(g, gt);
    const auto t0 = std::chrono::steady_clock::now();
    const auto a = align_trajectory(pred, gt);
    const double e = ate(a.aligned, gt);
    worst_time = std::max(worst_time, seconds_since(t0));
    const auto want = g.inverse();
    c.below(e, 1e-9, "ATE after alignment");
    c.near(a.transform.scale, want.scale, 1e-9, "scale");
    c.below((a.transform.rotation.matrix() - want.rotation.matrix()).cwiseAbs().maxCoeff(), 1e-9, "rotation");
    c.below((a.transform.translation - want.translation).cwiseAbs().maxCoeff(), 1e-9, "translation");
  }
  c.below(worst_time, 0.1, "runtime [s]");
}

void gauge_invariance(Check& c) {
  Rng rng(102);
  for (int trial = 0; trial < 50; ++trial) {
    const auto gt = fixture::random_trajectory(rng, 12, PoseConvention::WorldToCamera);
    const auto pred = fixture::random_trajectory(rng, 12, PoseConvention::WorldToCamera);
    const Sim3Transform g{1.0, fixture::random_rotation(rng), fixture::random_vec(rng, 10)};
    const auto a = pairwise_errors(pred, gt);
    const auto b = pairwise_errors(apply_sim3(g, pred), apply_sim3(g, gt));
    c.expect(a.size() == b.size(), "pair count");
    for (std::size_t k = 0; k < a.size() && k < b.size(); ++k) {
      c.near(b.pairs[k].rotation_deg, a.pairs[k].rotation_deg, 1e-9, "e_R");
      c.near(b.pairs[k].translation_deg, a.pairs[k].translation_deg, 1e-9, "e_t");
    }
    const auto ma = camera_metrics(a, PoseMetricOptions{});
    const auto mb = camera_metrics(b, PoseMetricOptions{});
    for (const auto& [k, v] : ma) c.near(mb.at(k), v, 1e-9, k);
  }
  // Same check on a perfect prediction, where errors sit at zero.
  const auto gt = fixture::random_trajectory(rng, 12, PoseConvention::WorldToCamera);
  const Sim3Transform g{1.0, fixture::random_rotation(rng), fixture::random_vec(rng, 10)};
  const auto moved = camera_metrics(pairwise_errors(apply_sim3(g, gt), apply_sim3(g, gt)), PoseMetricOptions{});
  const auto still = camera_metrics(pairwise_errors(gt, gt), PoseMetricOptions{});
  for (const auto& [k, v] : still) c.near(moved.at(k), v, 1e-9, k + " (perfect)");

  for (int trial = 0; trial < 50; ++trial) {
    const auto gtd = fixture::random_depth(rng, 64, 64, 0.1);
    const auto pd = fixture::random_depth(rng, 64, 64, 0.1);
    auto scaled = pd;
    const double s = std::exp(fixture::uniform(rng, std::log(1e-2), std::log(1e2)));
    for (auto& v : scaled.depth.data()) v *= s;
    const auto a = depth_metrics(pd, gtd, DepthMode::MedianAligned);
    const auto b = depth_metrics(scaled, gtd, DepthMode::MedianAligned);
    c.near(b.abs_rel, a.abs_rel, 1e-12, "AbsRel");
    c.near(b.sq_rel, a.sq_rel, 1e-12, "SqRel");
    c.near(b.rmse, a.rmse, 1e-12, "RMSE");
    c.near(b.log_rmse, a.log_rmse, 1e-12, "LogRMSE");
    for (std::size_t k = 0; k < a.deltas.size(); ++k) c.near(b.deltas[k].value, a.deltas[k].value, 1e-12, "delta");
  }
}

void chamfer_oracle(Check& c) {
  Rng rng(103);
  const auto t0 = std::chrono::steady_clock::now();
  for (int trial = 0; trial < 100; ++trial) {
    const auto pred = fixture::random_cloud(rng, 1 + rng() % 2000);
    const auto gt = fixture::random_cloud(rng, 1 + rng() % 2000);
    const double tau = fixture::uniform(rng, 0.005, 0.2);
    const auto got = chamfer_stats(pred, gt, tau);
    const auto want = oracle::brute_chamfer(pred, gt, tau);
    c.near(got.precision, want.precision, 1e-12, "Precision");
    c.near(got.recall, want.recall, 1e-12, "Recall");
    c.near(got.fscore, want.fscore, 1e-12, "F-score");
    c.near(got.mean_acc, want.mean_acc, 1e-12, "Acc");
    c.near(got.mean_comp, want.mean_comp, 1e-12, "Comp");
    c.near(got.overall, want.overall, 1e-12, "Overall");
  }
  c.below(seconds_since(t0), 30.0, "runtime [s]");
}

std::vector<std::set<VoxelKey>> random_instance(Rng& rng) {
  const std::size_t frames = 1 + rng() % 12;
  const std::int64_t voxels = 1 + static_cast<std::int64_t>(rng() % 64);
  const double density = fixture::uniform(rng, 0.02, 0.5);
  std::vector<std::set<VoxelKey>> out(frames);
  for (auto& f : out) {
    for (std::int64_t v = 0; v < voxels; ++v) {
      if (fixture::uniform(rng, 0, 1) < density) f.insert(VoxelKey{v, -v, 2 * v});
    }
  }
  if (rng() % 4 == 0 && frames > 1) out[frames - 1] = out[0];  // exact tie
  return out;
}

VoxelSupport to_support(const std::vector<std::set<VoxelKey>>& inst) {
  std::vector<std::vector<VoxelKey>> keys;
  for (const auto& s : inst) keys.emplace_back(s.begin(), s.end());
  return make_voxel_support(keys);
}

std::vector<std::int64_t> sorted(std::vector<std::int64_t> v) {
  std::sort(v.begin(), v.end());
  return v;
}

SceneIndex select_instance(const std::vector<std::set<VoxelKey>>& inst, std::int64_t k, std::int64_t lo,
                           std::int64_t hi) {
  const auto support = to_support(inst);
  SamplerConfig cfg;
  cfg.medium_min = BudgetRule{lo, lo, 1e18};
  cfg.medium_max = BudgetRule{hi, hi, 1e18};
  SceneIndex idx{"instance", "random", SceneTags{}, {}};
  idx.regimes[Regime::Sparse] = select_sparse(support, k).frames;
  idx.regimes[Regime::Medium] = select_medium(support, static_cast<std::int64_t>(inst.size()), cfg).frames;
  return idx;
}

void greedy_equivalence(Check& c) {
  Rng rng(104);
  fixture::TempDir dir("accept_greedy");
  int run = 0;
  while (run < 200) {
    const auto inst = random_instance(rng);
    const auto support = to_support(inst);
    if (support.universe.empty()) continue;
    ++run;
    const auto n = static_cast<std::int64_t>(inst.size());
    const std::int64_t k = 1 + static_cast<std::int64_t>(rng() % 12);
    const std::int64_t lo = 1 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(n));
    const std::int64_t hi = lo + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(n - lo + 1));

    const auto trace = greedy_cover(support, 0, static_cast<std::size_t>(k));
    c.expect(trace.order == oracle::greedy_replay(inst, 0, static_cast<std::size_t>(k)), "sparse pick order");
    const auto medium_trace = greedy_cover(support, static_cast<std::size_t>(lo), static_cast<std::size_t>(hi));
    c.expect(medium_trace.order ==
                 oracle::greedy_replay(inst, static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)),
             "medium pick order");

    const auto idx = select_instance(inst, k, lo, hi);
    c.expect(idx.frames(Regime::Sparse) == sorted(oracle::greedy_replay(inst, 0, static_cast<std::size_t>(k))),
             "sparse selection");
    c.expect(idx.frames(Regime::Medium) ==
                 sorted(oracle::greedy_replay(inst, static_cast<std::size_t>(lo), static_cast<std::size_t>(hi))),
             "medium selection");

    write_scene_index(idx, dir.path() / "a.json");
    write_scene_index(select_instance(inst, k, lo, hi), dir.path() / "b.json");
    c.expect(read_text_file(dir.path() / "a.json") == read_text_file(dir.path() / "b.json"),
             "index files byte-identical");
  }

  const auto scene = fixture::box_room_scene(12);
  for (const char* name : {"a.json", "b.json"}) {
    write_scene_index(sample_scene("room", "synthetic", scene.info.tags, scene.gt, kAllRegimes, SamplerConfig{}),
                      dir.path() / name);
  }
  c.expect(read_text_file(dir.path() / "a.json") == read_text_file(dir.path() / "b.json"),
           "sampled scene index byte-identical");
}

void dense_stride(Check& c) {
  const auto sel = select_dense(1300, 500);
  c.expect(sel.frames.size() == 434, "1300 frames -> 434 selected, got " + std::to_string(sel.frames.size()));
  bool stride3 = true;
  for (std::size_t k = 0; k < sel.frames.size(); ++k) {
    stride3 = stride3 && sel.frames[k] == static_cast<std::int64_t>(3 * k);
  }
  c.expect(stride3, "stride 3 starting at 0");
  c.expect(SamplerConfig{}.dense_budget == 500, "default T = 500");
  for (std::int64_t n = 1; n <= 500; ++n) {
    const auto all = select_dense(n, 500).frames;
    bool every = static_cast<std::int64_t>(all.size()) == n;
    for (std::int64_t i = 0; every && i < n; ++i) every = all[static_cast<std::size_t>(i)] == i;
    c.expect(every, "N = " + std::to_string(n) + " keeps all frames");
  }
}

void depth_oracle(Check& c) {
  Rng rng(105);
  for (int trial = 0; trial < 100; ++trial) {
    const auto gt = fixture::random_depth(rng, 64, 64, 0.1);
    auto pred = gt;
    for (std::size_t i = 0; i < pred.depth.size(); ++i) {
      pred.depth[i] *= fixture::uniform(rng, 0.5, 1.7);
      if (fixture::uniform(rng, 0, 1) < 0.05) pred.mask[i] = 0;
      if (fixture::uniform(rng, 0, 1) < 0.01) pred.depth[i] = -1.0;
    }
    for (const bool aligned : {false, true}) {
      const auto m = depth_metrics(pred, gt, aligned ? DepthMode::MedianAligned : DepthMode::Metric);
      const auto v = oracle::depth_direct({&pred}, {&gt}, aligned);
      const std::string mode = aligned ? " (aligned)" : " (metric)";
      c.near(m.abs_rel, v.abs_rel, 1e-10, "AbsRel" + mode);
      c.near(m.sq_rel, v.sq_rel, 1e-10, "SqRel" + mode);
      c.near(m.rmse, v.rmse, 1e-10, "RMSE" + mode);
      c.near(m.log_rmse, v.log_rmse, 1e-10, "LogRMSE" + mode);
      c.near(m.delta(1.03), v.d103, 1e-10, "delta_1.03" + mode);
      c.near(m.delta(1.05), v.d105, 1e-10, "delta_1.05" + mode);
      c.near(m.delta(1.10), v.d110, 1e-10, "delta_1.10" + mode);
    }
  }
}

PairErrorSet errors_from(const std::vector<std::pair<double, double>>& rt) {
  PairErrorSet s;
  for (std::size_t k = 0; k < rt.size(); ++k) {
    PairError e;
    e.i = 0;
    e.j = static_cast<std::int64_t>(k + 1);
    e.rotation_deg = rt[k].first;
    e.translation_deg = rt[k].second;
    s.pairs.push_back(e);
  }
  return s;
}

void auc_analytic(Check& c) {
  for (const double e : {0.0, 5.0, 15.0, 29.9}) {
    const double got = auc(errors_from({{e, 0.5 * e}}), 30.0);
    c.near(got, (30.0 - e) / 30.0, 0.1 / 30.0, "AUC@30 at e = " + std::to_string(e));
  }
  Rng rng(106);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::pair<double, double>> rt(1 + rng() % 60);
    for (auto& p : rt) p = {fixture::uniform(rng, 0, 40), fixture::uniform(rng, 0, 40)};
    const auto before = errors_from(rt);
    for (auto& p : rt) {
      p.first *= fixture::uniform(rng, 0, 1);
      if (rng() % 2) p.second *= fixture::uniform(rng, 0, 1);
    }
    const auto after = errors_from(rt);
    for (const double cap : {5.0, 15.0, 30.0}) {
      const double a = auc(before, cap);
      const double b = auc(after, cap);
      c.expect(b >= a, "AUC monotone under error reduction");
      c.expect(a >= 0.0 && b <= 1.0, "AUC in [0, 1]");
    }
  }
}

void cleaning(Check& c) {
  const auto f = fixture::clean_fixture();
  const auto t = fixture::run_stages(f);
  for (std::size_t k = 0; k < kCleanStageCount; ++k) {
    const std::string stage = to_string(static_cast<CleanStage>(k));
    c.expect(!f.expected[k].empty() || k == static_cast<std::size_t>(CleanStage::Bilateral), stage + " has a target");
    c.expect(fixture::dropped(t.frames[k], t.frames[k + 1]) == f.expected[k], stage + " invalidates exactly its set");
    c.expect(fixture::valid_subset(t.frames[k], t.frames[k + 1]), stage + " shrinks the valid set");
  }
  const auto all = clean_pipeline(f.frame, f.rgb, f.sky, CleanConfig{});
  c.expect(all.frame.mask == t.frames[5].mask, "pipeline equals staged run");
  for (std::size_t k = 0; k < kCleanStageCount; ++k) {
    c.expect(all.invalidated[k] == f.expected[k].size(), "stage count attribution");
  }
  bool filled = false;
  for (std::size_t i = 0; i < f.frame.mask.size(); ++i) {
    if (!f.frame.valid(i)) filled = filled || all.frame.valid(i) || all.frame.depth[i] != f.frame.depth[i];
  }
  c.expect(!filled, "no invalid pixel filled or changed");
}

void round_trips(Check& c) {
  Rng rng(107);
  fixture::TempDir dir("accept_io");
  for (int trial = 0; trial < 1000; ++trial) {
    const auto img = fixture::random_pfm(rng);
    io::write_pfm(dir.path() / "x.pfm", img);
    c.expect(fixture::same_bits(io::read_pfm(dir.path() / "x.pfm"), img), "PFM trial " + std::to_string(trial));

    const auto cloud = fixture::random_float_cloud(rng);
    io::write_ply(dir.path() / "x.ply", cloud);
    c.expect(fixture::same_bits(io::read_ply(dir.path() / "x.ply"), cloud), "PLY trial " + std::to_string(trial));

    const auto traj = fixture::random_pose_payload(rng);
    io::write_pose_file(dir.path() / "x.txt", traj);
    c.expect(fixture::same_bits(io::read_pose_file(dir.path() / "x.txt").trajectory, traj),
             "pose trial " + std::to_string(trial));

    const auto idx = fixture::random_scene_index(rng);
    write_scene_index(idx, dir.path() / "x.json");
    c.expect(load_scene_index(dir.path() / "x.json") == idx, "scene index trial " + std::to_string(trial));
  }

  // Two scenes for method "m", one of which ran out of memory; method "n" completes both.
  const auto a = fixture::box_room_scene(10, 32, 24, "a");
  const auto b = fixture::box_room_scene(10, 32, 24, "b");
  auto noisy = fixture::perfect_prediction(b.gt, "n");
  for (auto& [frame, d] : noisy.depth) {
    for (auto& v : d.depth.data()) v *= 1.0 + 0.02 * std::sin(v);
  }
  const auto ra = evaluate_scene(dense_index(a), Regime::Dense, a.gt, fixture::perfect_prediction(a.gt, "m"));
  std::vector<ReportSummary> reports = {
      summarize(nlohmann::json::parse(serialize(ra))),
      summarize(nlohmann::json::parse(
          serialize(failed_report(dense_index(b), Regime::Dense, "m", SceneStatus::Oom, "out of memory")))),
      summarize(evaluate_scene(dense_index(a), Regime::Dense, a.gt, fixture::perfect_prediction(a.gt, "n"))),
      summarize(evaluate_scene(dense_index(b), Regime::Dense, b.gt, noisy)),
  };
  const auto board = aggregate(reports);
  const LeaderboardRow* m = nullptr;
  const LeaderboardRow* n = nullptr;
  for (const auto& r : board.rows) {
    if (r.regime == "dense") (r.method == "m" ? m : n) = &r;
  }
  c.expect(m && n, "dense rows present");
  if (!m || !n) return;
  const auto& cell = m->cells.at("depth.AbsRel");
  c.expect(cell.partial && cell.scenes == 1 && cell.excluded == 1, "OOM cell partial over fewer scenes");
  c.expect(cell.mean && *cell.mean == ra.depth->pooled.abs_rel, "partial mean over the ok scene only");
  c.expect(m->excluded.at("oom") == 1, "OOM counted");
  c.expect(!n->cells.at("depth.AbsRel").partial, "complete method not partial");
  const std::string md = to_markdown(board);
  const std::string complete = detail::format_value(*n->cells.at("depth.AbsRel").mean);
  c.expect(md.find("(" + detail::format_value(*cell.mean) + ")") != std::string::npos, "parenthesized partial mean");
  const auto row_at = md.find("| n | dense |");
  const std::string n_row = row_at == std::string::npos ? "" : md.substr(row_at, md.find('\n', row_at) - row_at);
  c.expect(n_row.find(" " + complete + " |") != std::string::npos && n_row.find('(') == std::string::npos,
           "complete mean without parentheses");
  std::reverse(reports.begin(), reports.end());
  c.expect(to_json(aggregate(reports)) == to_json(board), "aggregation order independent");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Check&)>>> criteria = {
      {"perfect-prediction end-to-end", perfect_prediction},
      {"sim3 recovery", sim3_recovery},
      {"gauge invariance", gauge_invariance},
      {"chamfer oracle equivalence", chamfer_oracle},
      {"greedy set-cover equivalence", greedy_equivalence},
      {"dense stride constants", dense_stride},
      {"depth metric oracle", depth_oracle},
      {"auc analytic check", auc_analytic},
      {"cleaning monotonicity and fixtures", cleaning},
      {"format round trips and partial aggregation", round_trips},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    std::printf("%s  %-44s %8.3fs  %s\n", c.ok() ? "PASS" : "FAIL", name, seconds_since(t0), c.summary().c_str());
    failed += c.ok() ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
