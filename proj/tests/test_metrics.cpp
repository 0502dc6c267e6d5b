#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "survtrack/metrics.hpp"

namespace st = survtrack;
using st::Box;
using st::LabeledBox;
using st::LabeledFrames;

namespace {

LabeledFrames straight_tracks(int ids, int frames) {
  LabeledFrames out;
  for (int f = 1; f <= frames; ++f) {
    for (int id = 1; id <= ids; ++id) out[f].push_back({id, Box{100.0 * id + 2.0 * f, 50.0, 30.0, 60.0}});
  }
  return out;
}

LabeledFrames random_frames(std::mt19937_64& rng, int frames, int max_boxes, int max_ids, bool near = false,
                            const LabeledFrames* anchor = nullptr) {
  std::uniform_int_distribution<int> count(0, max_boxes);
  std::uniform_int_distribution<int> id(1, max_ids);
  std::uniform_real_distribution<double> pos(0, 120), size(20, 50), jitter(-12, 12);
  LabeledFrames out;
  for (int f = 1; f <= frames; ++f) {
    auto& v = out[f];
    if (near && anchor && anchor->count(f)) {
      for (const auto& g : anchor->at(f)) {
        if (count(rng) == 0) continue;
        v.push_back({id(rng), Box{g.box.x + jitter(rng), g.box.y + jitter(rng), g.box.w, g.box.h}});
      }
    }
    const int n = count(rng) - static_cast<int>(v.size());
    for (int k = 0; k < n; ++k) v.push_back({id(rng), Box{pos(rng), pos(rng), size(rng), size(rng)}});
    // a frame holds an identity at most once
    std::sort(v.begin(), v.end(), [](const LabeledBox& a, const LabeledBox& b) { return a.id < b.id; });
    v.erase(std::unique(v.begin(), v.end(), [](const LabeledBox& a, const LabeledBox& b) { return a.id == b.id; }),
            v.end());
  }
  return out;
}

}  // namespace

TEST(Evaluate, PerfectHypothesis) {
  const auto gt = straight_tracks(3, 20);
  const auto r = st::evaluate(gt, gt);
  ASSERT_TRUE(r.defined);
  EXPECT_DOUBLE_EQ(r.mota, 1.0);
  EXPECT_DOUBLE_EQ(r.motp, 1.0);
  EXPECT_DOUBLE_EQ(r.idf1, 1.0);
  EXPECT_EQ(r.clear.id_switches, 0);
}

TEST(Evaluate, EmptyHypothesis) {
  const auto gt = straight_tracks(5, 10);
  const auto r = st::evaluate(gt, LabeledFrames{});
  EXPECT_DOUBLE_EQ(r.mota, 0.0);
  EXPECT_EQ(r.clear.misses, 50);
  EXPECT_EQ(r.clear.false_positives, 0);
  EXPECT_DOUBLE_EQ(r.idf1, 0.0);
}

TEST(Evaluate, NoGroundTruthIsUndefined) {
  const auto r = st::evaluate(LabeledFrames{}, straight_tracks(1, 3));
  EXPECT_FALSE(r.defined);
}

TEST(Evaluate, IdentitySwapCountsTwoSwitches) {
  auto hyp = straight_tracks(2, 10);
  for (int f = 6; f <= 10; ++f) {
    for (auto& b : hyp[f]) b.id = 3 - b.id;
  }
  const auto r = st::evaluate(straight_tracks(2, 10), hyp);
  EXPECT_EQ(r.clear.id_switches, 2);
  EXPECT_DOUBLE_EQ(r.mota, 1.0 - 2.0 / 20.0);
  // the best global map keeps 5 frames per identity
  EXPECT_DOUBLE_EQ(r.idf1, 0.5);
}

TEST(Evaluate, ConsiderZeroDropsGroundTruthOnly) {
  st::FrameMap<st::GroundTruthRecord> gt, hyp;
  gt[1].push_back({1, 1, {0, 0, 10, 10}, true});
  gt[1].push_back({1, 2, {50, 0, 10, 10}, false});
  hyp[1].push_back({1, 7, {0, 0, 10, 10}, true});
  hyp[1].push_back({1, 8, {50, 0, 10, 10}, false});
  const auto r = st::evaluate(gt, hyp);
  EXPECT_EQ(r.clear.gt, 1);
  EXPECT_EQ(r.clear.false_positives, 1);
}

TEST(ClearMot, CarriedCorrespondenceSurvivesBetterAlternative) {
  st::ClearMotAccumulator acc(0.5);
  const std::vector<LabeledBox> gt{{1, {0, 0, 10, 10}}};
  acc.add_frame(gt, std::vector<LabeledBox>{{5, {0, 0, 10, 10}}});
  // hypothesis 5 drifts but stays above threshold; 6 fits better
  const std::vector<LabeledBox> hyp{{5, {2, 0, 10, 10}}, {6, {0, 0, 10, 10}}};
  const auto pairs = acc.add_frame(gt, hyp);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].second, 0);
  EXPECT_EQ(acc.counts().id_switches, 0);
  EXPECT_EQ(acc.counts().false_positives, 1);
}

TEST(ClearMot, SwitchCountedAfterGap) {
  st::ClearMotAccumulator acc(0.5);
  const std::vector<LabeledBox> gt{{1, {0, 0, 10, 10}}};
  acc.add_frame(gt, std::vector<LabeledBox>{{5, {0, 0, 10, 10}}});
  acc.add_frame(gt, std::vector<LabeledBox>{});
  acc.add_frame(gt, std::vector<LabeledBox>{{6, {0, 0, 10, 10}}});
  EXPECT_EQ(acc.counts().misses, 1);
  EXPECT_EQ(acc.counts().id_switches, 1);
}

TEST(FrameMatching, ThresholdIsInclusive) {
  // IoU exactly 0.5: 10x10 against 10x5 inside it
  const std::vector<LabeledBox> gt{{1, {0, 0, 10, 10}}};
  const std::vector<LabeledBox> hyp{{1, {0, 0, 10, 5}}};
  EXPECT_EQ(st::optimal_frame_matching(gt, hyp, 0.5).size(), 1u);
}

TEST(FrameMatching, AgreesWithBruteForce) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 300; ++trial) {
    const auto gt = random_frames(rng, 1, 6, 20);
    const auto hyp = random_frames(rng, 1, 6, 20, true, &gt);
    const auto& g = gt.at(1);
    const auto& h = hyp.at(1);
    const auto pairs = st::optimal_frame_matching(g, h, 0.5);
    double sum = 0.0;
    for (const auto& [i, j] : pairs) {
      const double v = oracle::plain_iou(g[i].box, h[j].box);
      ASSERT_GE(v, 0.5);
      sum += v;
    }
    const auto best = oracle::brute_force_frame_matching(g, h, 0.5);
    EXPECT_EQ(static_cast<int>(pairs.size()), best.count);
    EXPECT_NEAR(sum, best.iou_sum, 1e-9);
  }
}

TEST(Idf1, AgreesWithBruteForce) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const auto gt = random_frames(rng, 8, 4, 4);
    const auto hyp = random_frames(rng, 8, 4, 4, true, &gt);
    const auto r = st::evaluate(gt, hyp);
    if (!r.defined) continue;
    EXPECT_NEAR(r.idf1, oracle::brute_force_idf1(gt, hyp, 0.5), 1e-12);
  }
}

TEST(EvaluateProperty, RelabelingHypothesesChangesNothing) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 50; ++trial) {
    const auto gt = random_frames(rng, 12, 5, 6);
    const auto hyp = random_frames(rng, 12, 5, 6, true, &gt);
    LabeledFrames relabeled = hyp;
    for (auto& [f, v] : relabeled) {
      for (auto& b : v) b.id = 1000 - 7 * b.id;  // injective
    }
    const auto a = st::evaluate(gt, hyp);
    const auto b = st::evaluate(gt, relabeled);
    EXPECT_EQ(a.clear.id_switches, b.clear.id_switches);
    EXPECT_EQ(a.clear.matches, b.clear.matches);
    EXPECT_DOUBLE_EQ(a.mota, b.mota);
    EXPECT_DOUBLE_EQ(a.idf1, b.idf1);
  }
}

TEST(EvaluateProperty, ExtraFalsePositiveNeverRaisesMota) {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 50; ++trial) {
    const auto gt = random_frames(rng, 10, 5, 6);
    auto hyp = random_frames(rng, 10, 5, 6, true, &gt);
    const auto before = st::evaluate(gt, hyp);
    if (!before.defined) continue;
    // far from every ground-truth box
    hyp[1 + trial % 10].push_back({999, Box{5000, 5000, 10, 10}});
    const auto after = st::evaluate(gt, hyp);
    EXPECT_LE(after.mota, before.mota);
    EXPECT_EQ(after.clear.false_positives, before.clear.false_positives + 1);
  }
}

TEST(EvaluateProperty, CountsBalance) {
  std::mt19937_64 rng(45);
  for (int trial = 0; trial < 50; ++trial) {
    const auto gt = random_frames(rng, 10, 5, 6);
    const auto hyp = random_frames(rng, 10, 5, 6, true, &gt);
    const auto r = st::evaluate(gt, hyp);
    EXPECT_EQ(r.clear.matches + r.clear.misses, r.clear.gt);
    EXPECT_EQ(r.clear.matches + r.clear.false_positives, r.clear.hypotheses);
    EXPECT_EQ(r.identity.idtp + r.identity.idfn, r.clear.gt);
    EXPECT_EQ(r.identity.idtp + r.identity.idfp, r.clear.hypotheses);
  }
}

TEST(Report, SummaryLineMarksUndefined) {
  const auto r = st::evaluate(LabeledFrames{}, LabeledFrames{});
  EXPECT_NE(st::format_summary_line(r, "x").find("nan"), std::string::npos);
  const auto ok = st::evaluate(straight_tracks(1, 2), straight_tracks(1, 2));
  EXPECT_NE(st::format_report_table(ok, "x").find("1.000"), std::string::npos);
}
