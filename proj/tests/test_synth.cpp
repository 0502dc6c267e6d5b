#include <filesystem>
#include <set>

#include <gtest/gtest.h>

#include "survtrack/fingerprint.hpp"
#include "survtrack/ini.hpp"
#include "survtrack/synth.hpp"

namespace fs = std::filesystem;
namespace st = survtrack;
using st::Box;

namespace {

std::size_t count(const auto& frames) {
  std::size_t n = 0;
  for (const auto& [f, v] : frames) n += v.size();
  return n;
}

st::MaybeFingerprint fingerprint_of(const st::Image& frame, const Box& box) {
  st::HistogramEmbedder embedder;
  return st::make_fingerprint(embedder(st::extract_patch(frame, box, {})));
}

}  // namespace

TEST(TargetBox, PiecewiseConstantVelocity) {
  st::TargetSpec t;
  t.entry = 2;
  t.exit = 20;
  t.initial = {10, 20, 5, 5};
  t.velocity = {1, 0};
  t.changes = {{6, Eigen::Vector2d(0, 2)}};
  EXPECT_EQ(st::target_box(t, 2), (Box{10, 20, 5, 5}));
  EXPECT_EQ(st::target_box(t, 6), (Box{14, 20, 5, 5}));
  EXPECT_EQ(st::target_box(t, 9), (Box{14, 26, 5, 5}));
}

TEST(Generate, NoiselessDetectionsEqualGroundTruth) {
  const auto spec = st::lanes_scenario(6, 80, 3);
  const auto scene = st::generate(spec);
  ASSERT_EQ(count(scene.detections), count(scene.ground_truth));
  for (const auto& [f, gts] : scene.ground_truth) {
    const auto& dets = scene.detections.at(f);
    ASSERT_EQ(dets.size(), gts.size());
    for (std::size_t k = 0; k < gts.size(); ++k) EXPECT_EQ(dets[k].box, gts[k].box);
  }
}

TEST(Generate, FullDropoutKeepsGroundTruth) {
  auto spec = st::lanes_scenario(4, 50, 3);
  spec.noise.dropout = 1.0;
  const auto scene = st::generate(spec);
  EXPECT_TRUE(scene.detections.empty());
  std::size_t expected = 0;
  for (const auto& t : spec.targets) expected += static_cast<std::size_t>(t.exit - t.entry);
  EXPECT_EQ(count(scene.ground_truth), expected);
}

TEST(Generate, GroundTruthCountIsTotalLifetime) {
  const auto spec = st::crowd_scenario(20, 300, 9, {960.0, 540.0});
  const auto scene = st::generate(spec);
  std::size_t expected = 0;
  for (const auto& t : spec.targets) expected += static_cast<std::size_t>(t.exit - t.entry);
  EXPECT_EQ(count(scene.ground_truth), expected);
}

TEST(Generate, SeedDeterminism) {
  auto spec = st::crowd_scenario(10, 120, 5, {960.0, 540.0});
  spec.noise = {1.5, 0.1, 2.0};
  const auto a = st::generate(spec);
  const auto b = st::generate(spec);
  ASSERT_EQ(count(a.detections), count(b.detections));
  for (const auto& [f, v] : a.detections) {
    for (std::size_t k = 0; k < v.size(); ++k) {
      EXPECT_EQ(v[k].box, b.detections.at(f)[k].box);
      EXPECT_EQ(v[k].confidence, b.detections.at(f)[k].confidence);
    }
  }
  spec.seed = 6;
  spec.targets = st::crowd_scenario(10, 120, 5, {960.0, 540.0}).targets;
  const auto c = st::generate(spec);
  EXPECT_NE(st::format_detection_line(c.detections.begin()->second.front()),
            st::format_detection_line(a.detections.begin()->second.front()));
}

TEST(Generate, JitterIsBoundedAndClutterIsLowConfidence) {
  auto spec = st::lanes_scenario(5, 100, 2);
  spec.noise.jitter_std = 2.0;
  spec.noise.clutter_rate = 3.0;
  const auto scene = st::generate(spec);
  std::size_t clutter = 0;
  for (const auto& [f, dets] : scene.detections) {
    const auto& gts = scene.ground_truth.at(f);
    std::size_t k = 0;
    for (const auto& d : dets) {
      if (d.confidence < 1.0) {
        ++clutter;
        EXPECT_GE(d.confidence, 0.3);
        continue;
      }
      ASSERT_LT(k, gts.size());
      EXPECT_LE(std::abs(d.box.x - gts[k].box.x), 6.0 + 1e-9);
      EXPECT_LE(std::abs(d.box.h - gts[k].box.h), 6.0 + 1e-9);
      ++k;
    }
  }
  EXPECT_GT(clutter, 200u);
  EXPECT_LT(clutter, 400u);
}

TEST(Generate, HiddenTargetsHaveNoDetectionAndAreNotConsidered) {
  const auto spec = st::occlusion_scenario(20);
  const auto scene = st::generate(spec);
  for (int f = 61; f <= 80; ++f) {
    EXPECT_FALSE(scene.detections.count(f));
    EXPECT_FALSE(scene.ground_truth.at(f).front().consider);
  }
  EXPECT_TRUE(scene.ground_truth.at(81).front().consider);
  EXPECT_EQ(scene.detections.at(81).size(), 1u);
}

TEST(Appearance, TexturesDistinctAndStable) {
  std::set<std::array<int, 6>> seen;
  for (int k = 0; k < 8; ++k) {
    const auto t = st::appearance_texture(k);
    seen.insert({t.base[0], t.base[1], t.base[2], t.stripe[0], t.stripe[1], t.stripe[2]});
    for (int j = 0; j < k; ++j) {
      const auto u = st::appearance_texture(j);
      for (int c = 0; c < 3; ++c) EXPECT_NE(t.base[c], u.base[c]);
    }
  }
  EXPECT_EQ(seen.size(), 8u);

  // the same identity embeds alike at different frames and positions
  const auto spec = st::lanes_scenario(3, 100, 1);
  const auto scene = st::generate(spec);
  const auto f10 = st::render_frame(spec, 10);
  const auto f90 = st::render_frame(spec, 90);
  const auto a10 = fingerprint_of(f10, scene.ground_truth.at(10)[0].box);
  const auto a90 = fingerprint_of(f90, scene.ground_truth.at(90)[0].box);
  const auto b90 = fingerprint_of(f90, scene.ground_truth.at(90)[1].box);
  ASSERT_TRUE(a10 && a90 && b90);
  EXPECT_LT(st::fingerprint_cost(a10, a90), 0.05);
  EXPECT_GT(st::fingerprint_cost(a10, b90), 0.3);
}

TEST(Crossing, GeometryTiesWhereFingerprintsDiscriminate) {
  const auto spec = st::crossing_scenario();
  ASSERT_EQ(spec.targets.size(), 2u);
  const auto& a = spec.targets[0];
  const auto& b = spec.targets[1];
  // crossing frame: both targets occupy the same box
  int meet = -1;
  for (int f = 0; f < spec.frames; ++f) {
    if (st::target_box(a, f) == st::target_box(b, f)) meet = f;
  }
  ASSERT_GE(meet, 0);
  EXPECT_TRUE(a.hidden_at(meet) && b.hidden_at(meet));
  const Box ga = st::target_box(a, meet);
  const Box gb = st::target_box(b, meet);
  // a constant-velocity prediction from the last visible frame of either target
  for (const auto& t : {a, b}) {
    const int last = t.hidden.front().first - 1;
    const Box seen = st::target_box(t, last);
    const Box prev = st::target_box(t, last - 1);
    const double n = meet - last;
    const Box pred = seen.translated(n * (seen.x - prev.x), n * (seen.y - prev.y));
    EXPECT_LT(std::abs(st::iou(pred, ga) - st::iou(pred, gb)), 1e-3);
  }

  const int reappear = st::crossing_reappear_frame(spec);
  EXPECT_FALSE(a.hidden_at(reappear));
  const auto before = st::render_frame(spec, a.hidden.front().first);  // MOT frame = last visible + 1
  const auto after = st::render_frame(spec, reappear + 1);
  const auto fa0 = fingerprint_of(before, st::target_box(a, a.hidden.front().first - 1));
  const auto fb0 = fingerprint_of(before, st::target_box(b, b.hidden.front().first - 1));
  const auto fa1 = fingerprint_of(after, st::target_box(a, reappear));
  const auto fb1 = fingerprint_of(after, st::target_box(b, reappear));
  ASSERT_TRUE(fa0 && fb0 && fa1 && fb1);
  const double same = st::fingerprint_cost(fa0, fa1) + st::fingerprint_cost(fb0, fb1);
  const double swapped = st::fingerprint_cost(fa0, fb1) + st::fingerprint_cost(fb0, fa1);
  EXPECT_LT(same + 0.5, swapped);
}

TEST(ScenarioIni, ExplicitTargets) {
  const auto doc = st::IniDocument::parse(
      "[scene]\nframes = 40\nseed = 7\nwidth = 320\nheight = 240\njitter = 0.5\n"
      "[target 3]\nentry = 2\nexit = 30\nbox = 10, 20, 15, 30\nvelocity = 1, 0.5\nappearance = 4\n"
      "changes = 10:0:1, 20:-1:0\nhidden = 12-15\n");
  const auto spec = st::scenario_from_ini(doc);
  EXPECT_EQ(spec.frames, 40);
  EXPECT_EQ(spec.seed, 7u);
  EXPECT_EQ(spec.geometry.width, 320.0);
  EXPECT_EQ(spec.noise.jitter_std, 0.5);
  ASSERT_EQ(spec.targets.size(), 1u);
  const auto& t = spec.targets[0];
  EXPECT_EQ(t.id, 3);
  EXPECT_EQ(t.entry, 2);
  EXPECT_EQ(t.exit, 30);
  EXPECT_EQ(t.initial, (Box{10, 20, 15, 30}));
  EXPECT_EQ(t.appearance, 4);
  ASSERT_EQ(t.changes.size(), 2u);
  EXPECT_EQ(t.changes[1].velocity.x(), -1.0);
  EXPECT_TRUE(t.hidden_at(12));
  EXPECT_FALSE(t.hidden_at(15));
}

TEST(ScenarioIni, GeneratorAndErrors) {
  const auto lanes = st::scenario_from_ini(st::IniDocument::parse("[scene]\ngenerator = lanes\ntargets = 4\nframes = 60\n"));
  EXPECT_EQ(lanes.targets.size(), 4u);
  EXPECT_THROW(st::scenario_from_ini(st::IniDocument::parse("[scene]\ngenerator = swirl\n")), st::ScenarioError);
  EXPECT_THROW(st::scenario_from_ini(st::IniDocument::parse("[scene]\ndropout = 1.5\n")), st::ScenarioError);
  EXPECT_THROW(
      st::scenario_from_ini(st::IniDocument::parse("[scene]\nframes = 10\n[target 1]\nentry = 5\nexit = 3\nbox = 0,0,1,1\n")),
      st::ScenarioError);
}

TEST(WriteScene, LayoutOnDisk) {
  const fs::path dir = fs::temp_directory_path() / "survtrack_test_scene";
  fs::remove_all(dir);
  const auto spec = st::occlusion_scenario(5, 80);
  st::write_scene(dir, spec, st::generate(spec), true);
  EXPECT_TRUE(fs::exists(dir / "seqinfo.ini"));
  EXPECT_TRUE(fs::exists(dir / "det" / "det.txt"));
  EXPECT_TRUE(fs::exists(dir / "gt" / "gt.txt"));
  const std::string ext = st::png_supported() ? ".png" : ".ppm";
  EXPECT_TRUE(fs::exists(dir / "img1" / ("000080" + ext)));
}
