#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "survtrack/geometry.hpp"
#include "survtrack/image.hpp"
#include "survtrack/ini.hpp"
#include "survtrack/mot_io.hpp"

namespace survtrack {

class ScenarioError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Velocity change taking effect from `frame` onwards (0-based frame offset).
struct VelocityChange {
  int frame = 0;
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();
};

/// One ground-truth identity. Frames are 0-based offsets; the target exists
/// on [entry, exit). Within `hidden` intervals [first, last) the target is
/// fully occluded: it is not drawn, never detected, and its ground truth is
/// written with consider = 0 and visibility 0.
struct TargetSpec {
  int id = 1;
  int entry = 0;
  int exit = 1;
  Box initial;
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();
  std::vector<VelocityChange> changes;
  int appearance = 0;
  std::vector<std::pair<int, int>> hidden;

  bool hidden_at(int frame) const;
};

struct ScenarioNoise {
  double jitter_std = 0.0;    ///< px, truncated at +-3 sigma
  double dropout = 0.0;       ///< per-detection miss probability
  double clutter_rate = 0.0;  ///< mean false positives per frame (Poisson)
  double clutter_min_width = 15.0;
  double clutter_max_width = 60.0;
  double clutter_aspect = 2.4;  ///< height / width of clutter boxes
};

struct ScenarioSpec {
  std::string name = "synthetic";
  std::uint64_t seed = 1;
  ImageGeometry<double> geometry{960.0, 540.0};
  int frames = 100;
  std::vector<TargetSpec> targets;
  ScenarioNoise noise;

  void validate() const;
};

struct Scene {
  FrameMap<GroundTruthRecord> ground_truth;
  FrameMap<DetectionRecord> detections;
};

/// Ground-truth box of a target at a 0-based frame (no visibility check).
Box target_box(const TargetSpec& target, int frame);

Scene generate(const ScenarioSpec& spec);

/// Flat base color plus horizontal stripes of a second color, both keyed by
/// the appearance id. Keys that differ modulo 8 differ in every channel.
struct Texture {
  std::uint8_t base[3];
  std::uint8_t stripe[3];
  int period = 8;
  int thickness = 3;
};

Texture appearance_texture(int key);

/// Background plus every visible target at MOT frame `frame` (1-based), drawn
/// back to front by bottom edge.
Image render_frame(const ScenarioSpec& spec, int frame);

/// Sequence directory: seqinfo.ini, det/det.txt, gt/gt.txt and optionally
/// img1/<frame>.png (or .ppm without libpng).
void write_scene(const std::filesystem::path& dir, const ScenarioSpec& spec, const Scene& scene, bool images);

// Scenario builders.

/// Targets in separate horizontal lanes at constant velocity for the whole
/// sequence, optionally entering at staggered frames.
ScenarioSpec lanes_scenario(int targets, int frames, std::uint64_t seed = 1);

/// Two targets meet head-on, are hidden while their boxes overlap, then both
/// turn back at a third of their approach speed. A constant-velocity
/// prediction puts each track on the other target's detection.
ScenarioSpec crossing_scenario();
/// Frame (0-based) at which the two crossing targets first reappear.
int crossing_reappear_frame(const ScenarioSpec& crossing);

/// One target at constant velocity, hidden for `hidden_frames` frames.
ScenarioSpec occlusion_scenario(int hidden_frames, int frames = 200);

/// Random walkers keeping about `per_frame` targets alive in every frame.
ScenarioSpec crowd_scenario(int per_frame, int frames, std::uint64_t seed = 1,
                            ImageGeometry<double> geometry = {1920.0, 1080.0});

/// Reads `[scene]` keys (optionally `generator = lanes|crowd|crossing|occlusion`)
/// and explicit `[target <id>]` sections.
ScenarioSpec scenario_from_ini(const IniDocument& doc);
ScenarioSpec read_scenario(const std::filesystem::path& path);

}  // namespace survtrack
