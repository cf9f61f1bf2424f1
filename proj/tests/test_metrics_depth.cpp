#include <gtest/gtest.h>

#include "oracles.hpp"
#include "synthetic.hpp"

using namespace geoeval;
using fixture::Rng;

namespace {

DepthFrame scaled(const DepthFrame& f, double s) {
  DepthFrame out = f;
  for (auto& d : out.depth.data()) d *= s;
  return out;
}

void expect_matches(const DepthMetrics& m, const oracle::DepthValues& v, double tol) {
  EXPECT_NEAR(m.abs_rel, v.abs_rel, tol);
  EXPECT_NEAR(m.sq_rel, v.sq_rel, tol);
  EXPECT_NEAR(m.rmse, v.rmse, tol);
  EXPECT_NEAR(m.log_rmse, v.log_rmse, tol);
  EXPECT_NEAR(m.delta(1.03), v.d103, tol);
  EXPECT_NEAR(m.delta(1.05), v.d105, tol);
  EXPECT_NEAR(m.delta(1.10), v.d110, tol);
}

}  // namespace

TEST(MedianScale, Examples) {
  Rng rng(1);
  const auto gt = fixture::random_depth(rng, 16, 16);
  EXPECT_EQ(median_scale(gt, gt), 1.0);
  EXPECT_DOUBLE_EQ(median_scale(scaled(gt, 2.0), gt), 0.5);
  EXPECT_THROW(median_scale(DepthFrame(4, 4), gt), InvalidArgument);
  try {
    median_scale(DepthFrame(16, 16), gt);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_STREQ(e.what(), "no overlap");
  }
}

TEST(MedianScale, MatchesSortOracle) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const int w = 3 + static_cast<int>(rng() % 20);
    const auto gt = fixture::random_depth(rng, w, 7, 0.2);
    const auto pred = fixture::random_depth(rng, w, 7, 0.2);
    std::vector<double> r;
    for (std::size_t i = 0; i < gt.depth.size(); ++i) {
      if (gt.mask[i] && pred.mask[i]) r.push_back(gt.depth[i] / pred.depth[i]);
    }
    if (r.empty()) continue;
    std::sort(r.begin(), r.end());
    const double m = r.size() % 2 ? r[r.size() / 2] : 0.5 * (r[r.size() / 2 - 1] + r[r.size() / 2]);
    EXPECT_EQ(median_scale(pred, gt), m);
  }
}

TEST(DepthMetrics, PerfectPrediction) {
  Rng rng(3);
  const auto gt = fixture::random_depth(rng, 32, 32);
  for (const auto mode : {DepthMode::Metric, DepthMode::MedianAligned}) {
    const auto m = depth_metrics(gt, gt, mode);
    EXPECT_EQ(m.abs_rel, 0.0);
    EXPECT_EQ(m.rmse, 0.0);
    EXPECT_EQ(m.log_rmse, 0.0);
    for (const auto& d : m.deltas) EXPECT_EQ(d.value, 1.0);
  }
}

TEST(DepthMetrics, ConstantRatio) {
  Rng rng(4);
  const auto gt = fixture::random_depth(rng, 32, 32);
  const auto pred = scaled(gt, 1.04);
  const auto metric = depth_metrics(pred, gt, DepthMode::Metric);
  EXPECT_NEAR(metric.abs_rel, 0.04, 1e-12);
  EXPECT_EQ(metric.delta(1.03), 0.0);
  EXPECT_EQ(metric.delta(1.05), 1.0);
  EXPECT_EQ(metric.delta(1.10), 1.0);
  const auto aligned = depth_metrics(pred, gt, DepthMode::MedianAligned);
  EXPECT_NEAR(aligned.abs_rel, 0.0, 1e-12);
}

TEST(DepthMetrics, MatchesDirectFormulaOracle) {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto gt = fixture::random_depth(rng, 64, 64, 0.1);
    auto pred = gt;
    for (std::size_t i = 0; i < pred.depth.size(); ++i) {
      pred.depth[i] *= fixture::uniform(rng, 0.5, 1.6);
      if (fixture::uniform(rng, 0, 1) < 0.05) pred.mask[i] = 0;
      if (fixture::uniform(rng, 0, 1) < 0.01) pred.depth[i] = -1.0;
    }
    for (const bool aligned : {false, true}) {
      const auto m = depth_metrics(pred, gt, aligned ? DepthMode::MedianAligned : DepthMode::Metric);
      expect_matches(m, oracle::depth_direct({&pred}, {&gt}, aligned), 1e-10);
    }
  }
}

TEST(DepthMetrics, MedianAlignedScaleInvariance) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto gt = fixture::random_depth(rng, 40, 30);
    auto pred = fixture::random_depth(rng, 40, 30);
    const double c = std::exp(fixture::uniform(rng, -3, 3));
    const auto a = depth_metrics(pred, gt, DepthMode::MedianAligned);
    const auto b = depth_metrics(scaled(pred, c), gt, DepthMode::MedianAligned);
    EXPECT_NEAR(a.abs_rel, b.abs_rel, 1e-12);
    EXPECT_NEAR(a.sq_rel, b.sq_rel, 1e-12);
    EXPECT_NEAR(a.rmse, b.rmse, 1e-12);
    EXPECT_NEAR(a.log_rmse, b.log_rmse, 1e-12);
    for (std::size_t k = 0; k < a.deltas.size(); ++k) EXPECT_NEAR(a.deltas[k].value, b.deltas[k].value, 1e-12);
  }
}

TEST(DepthMetrics, InvariantsHold) {
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const auto gt = fixture::random_depth(rng, 20, 20);
    const auto pred = fixture::random_depth(rng, 20, 20);
    const auto m = depth_metrics(pred, gt, DepthMode::Metric);
    EXPECT_GE(m.abs_rel, 0);
    EXPECT_GE(m.sq_rel, 0);
    EXPECT_GE(m.rmse, 0);
    EXPECT_GE(m.log_rmse, 0);
    EXPECT_LE(m.delta(1.03), m.delta(1.05));
    EXPECT_LE(m.delta(1.05), m.delta(1.10));
    for (const auto& d : m.deltas) {
      EXPECT_GE(d.value, 0);
      EXPECT_LE(d.value, 1);
    }
  }
}

TEST(DepthMetrics, NonPositivePredictionsArePenalized) {
  DepthFrame gt(2, 1, 2.0, true);
  DepthFrame pred(2, 1, 2.0, true);
  pred.depth.at(1, 0) = 0.0;
  const auto m = depth_metrics(pred, gt, DepthMode::Metric);
  EXPECT_EQ(m.pixels, 2u);
  EXPECT_NEAR(m.abs_rel, 0.5 * (2.0 - kMinPredictedDepth) / 2.0, 1e-15);
  EXPECT_EQ(m.delta(1.10), 0.5);
}

TEST(DepthMetrics, PoolingMatchesPooledPixelOracle) {
  Rng rng(8);
  std::vector<DepthFrame> gts, preds;
  for (int f = 0; f < 5; ++f) {
    gts.push_back(fixture::random_depth(rng, 10 + f, 12, 0.1 * f));
    preds.push_back(fixture::random_depth(rng, 10 + f, 12, 0.1));
  }
  std::vector<const DepthFrame*> gp, pp;
  for (int f = 0; f < 5; ++f) {
    gp.push_back(&gts[f]);
    pp.push_back(&preds[f]);
  }
  for (const bool aligned : {false, true}) {
    const auto s = scene_depth_metrics(preds, gts, aligned ? DepthMode::MedianAligned : DepthMode::Metric);
    expect_matches(s.pooled, oracle::depth_direct(pp, gp, aligned), 1e-10);
    ASSERT_EQ(s.per_frame.size(), 5u);
    std::size_t pixels = 0;
    double abs_weighted = 0.0;
    for (const auto& m : s.per_frame) {
      pixels += m.pixels;
      abs_weighted += m.abs_rel * static_cast<double>(m.pixels);
    }
    EXPECT_EQ(pixels, s.pooled.pixels);
    EXPECT_NEAR(abs_weighted / static_cast<double>(pixels), s.pooled.abs_rel, 1e-12);
  }
}

TEST(DepthMetrics, Errors) {
  DepthFrame gt(4, 4, 1.0, true);
  EXPECT_THROW(depth_metrics(DepthFrame(4, 4), gt, DepthMode::Metric), DataError);
  EXPECT_THROW(depth_metrics(DepthFrame(3, 4, 1.0, true), gt, DepthMode::Metric), InvalidArgument);
  EXPECT_THROW((void)depth_metrics(gt, gt, DepthMode::Metric).delta(1.2), InvalidArgument);
  EXPECT_THROW(depth_metrics(gt, DepthFrame(4, 4), DepthMode::Metric), DataError);
}
