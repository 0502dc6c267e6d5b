#include "survtrack/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace survtrack {

bool TargetSpec::hidden_at(int frame) const {
  return std::any_of(hidden.begin(), hidden.end(),
                     [frame](const auto& span) { return frame >= span.first && frame < span.second; });
}

void ScenarioSpec::validate() const {
  if (!geometry.valid()) throw ScenarioError("scenario geometry must be positive");
  if (frames <= 0) throw ScenarioError("scenario needs at least one frame");
  const auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(noise.dropout)) throw ScenarioError("dropout probability must lie in [0, 1]");
  if (!(noise.jitter_std >= 0.0) || !(noise.clutter_rate >= 0.0)) {
    throw ScenarioError("jitter and clutter rate must be non-negative");
  }
  if (!(noise.clutter_min_width > 0.0) || noise.clutter_max_width < noise.clutter_min_width ||
      !(noise.clutter_aspect > 0.0)) {
    throw ScenarioError("clutter box distribution is invalid");
  }
  std::vector<int> ids;
  for (const auto& t : targets) {
    if (!(t.entry >= 0 && t.entry < t.exit && t.exit <= frames)) {
      throw ScenarioError("target " + std::to_string(t.id) + ": need 0 <= entry < exit <= frames");
    }
    if (t.initial.degenerate()) throw ScenarioError("target " + std::to_string(t.id) + ": box must have positive size");
    if (t.id < 1) throw ScenarioError("target ids must be positive");
    for (const auto& h : t.hidden) {
      if (h.first >= h.second) throw ScenarioError("target " + std::to_string(t.id) + ": empty hidden interval");
    }
    ids.push_back(t.id);
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw ScenarioError("duplicate target id");
}

Box target_box(const TargetSpec& target, int frame) {
  // piecewise-constant velocity integrated over [entry, frame)
  std::vector<VelocityChange> changes = target.changes;
  std::stable_sort(changes.begin(), changes.end(), [](const auto& a, const auto& b) { return a.frame < b.frame; });
  Eigen::Vector2d offset = Eigen::Vector2d::Zero();
  int from = target.entry;
  Eigen::Vector2d v = target.velocity;
  for (const auto& c : changes) {
    if (c.frame >= frame) break;
    if (c.frame > from) {
      offset += static_cast<double>(c.frame - from) * v;
      from = c.frame;
    }
    v = c.velocity;
  }
  if (frame > from) offset += static_cast<double>(frame - from) * v;
  return target.initial.translated(offset.x(), offset.y());
}

namespace {

double truncated_normal(std::mt19937_64& rng, double stddev) {
  if (!(stddev > 0.0)) return 0.0;
  std::normal_distribution<double> normal(0.0, 1.0);
  double z = normal(rng);
  while (std::abs(z) > 3.0) z = normal(rng);
  return z * stddev;
}

}  // namespace

Scene generate(const ScenarioSpec& spec) {
  spec.validate();
  Scene scene;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto& noise = spec.noise;
  for (int f = 0; f < spec.frames; ++f) {
    const int mot_frame = f + 1;
    for (const TargetSpec& t : spec.targets) {
      if (f < t.entry || f >= t.exit) continue;
      const Box box = target_box(t, f);
      const bool hidden = t.hidden_at(f);
      GroundTruthRecord gt;
      gt.frame = mot_frame;
      gt.id = t.id;
      gt.box = box;
      gt.consider = !hidden;
      gt.object_class = 1;
      gt.visibility = hidden ? 0.0 : 1.0;
      scene.ground_truth[mot_frame].push_back(gt);
      if (hidden) continue;
      if (noise.dropout > 0.0 && unit(rng) < noise.dropout) continue;
      DetectionRecord det;
      det.frame = mot_frame;
      det.box = box;
      if (noise.jitter_std > 0.0) {
        det.box.x += truncated_normal(rng, noise.jitter_std);
        det.box.y += truncated_normal(rng, noise.jitter_std);
        det.box.w = std::max(1.0, det.box.w + truncated_normal(rng, noise.jitter_std));
        det.box.h = std::max(1.0, det.box.h + truncated_normal(rng, noise.jitter_std));
      }
      det.confidence = 1.0;
      scene.detections[mot_frame].push_back(det);
    }
    if (noise.clutter_rate > 0.0) {
      std::poisson_distribution<int> count(noise.clutter_rate);
      const int n = count(rng);
      for (int k = 0; k < n; ++k) {
        DetectionRecord det;
        det.frame = mot_frame;
        const double w = noise.clutter_min_width + unit(rng) * (noise.clutter_max_width - noise.clutter_min_width);
        const double h = std::min(w * noise.clutter_aspect, spec.geometry.height);
        det.box = {unit(rng) * std::max(0.0, spec.geometry.width - w), unit(rng) * std::max(0.0, spec.geometry.height - h),
                   w, h};
        det.confidence = 0.3 + 0.7 * unit(rng);
        scene.detections[mot_frame].push_back(det);
      }
    }
  }
  return scene;
}

Texture appearance_texture(int key) {
  // odd multipliers make key -> level a bijection modulo 8 in each channel
  static constexpr int kMul[3] = {1, 3, 5};
  static constexpr int kAdd[3] = {0, 2, 5};
  static constexpr int kStripeShift[3] = {3, 5, 7};
  const int k = ((key % 8) + 8) % 8;
  Texture t{};
  for (int c = 0; c < 3; ++c) {
    const int level = (kMul[c] * k + kAdd[c]) % 8;
    const int stripe = (level + kStripeShift[c]) % 8;
    t.base[c] = static_cast<std::uint8_t>(level * 32 + 16);
    t.stripe[c] = static_cast<std::uint8_t>(stripe * 32 + 16);
  }
  const int m = ((key % 5) + 5) % 5;
  t.period = 8 + 3 * m;
  t.thickness = std::max(2, t.period / 4);
  return t;
}

Image render_frame(const ScenarioSpec& spec, int frame) {
  constexpr std::uint8_t kBackground = 56;
  Image image(static_cast<int>(std::lround(spec.geometry.width)), static_cast<int>(std::lround(spec.geometry.height)),
              kBackground);
  const int f = frame - 1;
  struct Visible {
    Box box;
    const TargetSpec* target;
    std::size_t order;
  };
  std::vector<Visible> visible;
  for (std::size_t i = 0; i < spec.targets.size(); ++i) {
    const TargetSpec& t = spec.targets[i];
    if (f < t.entry || f >= t.exit || t.hidden_at(f)) continue;
    visible.push_back({target_box(t, f), &t, i});
  }
  std::stable_sort(visible.begin(), visible.end(),
                   [](const Visible& a, const Visible& b) { return a.box.bottom() < b.box.bottom(); });
  for (const Visible& v : visible) {
    const Texture tex = appearance_texture(v.target->appearance);
    const Box& b = v.box;
    image.fill_rect(b.x, b.y, b.right(), b.bottom(), tex.base);
    for (double s = tex.period / 2.0; s < b.h; s += tex.period) {
      image.fill_rect(b.x, b.y + s, b.right(), std::min(b.bottom(), b.y + s + tex.thickness), tex.stripe);
    }
  }
  return image;
}

void write_scene(const std::filesystem::path& dir, const ScenarioSpec& spec, const Scene& scene, bool images) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir / "det", ec);
  fs::create_directories(dir / "gt", ec);
  if (ec) throw MotIoError("cannot create scene directory " + dir.string() + ": " + ec.message());
  SequenceInfo info;
  info.name = spec.name;
  info.image_dir = "img1";
  info.image_ext = png_supported() ? ".png" : ".ppm";
  info.length = spec.frames;
  info.width = static_cast<int>(std::lround(spec.geometry.width));
  info.height = static_cast<int>(std::lround(spec.geometry.height));
  write_sequence_info(dir / "seqinfo.ini", info);
  write_detections(dir / "det" / "det.txt", scene.detections);
  write_ground_truth(dir / "gt" / "gt.txt", scene.ground_truth);
  if (!images) return;
  fs::create_directories(dir / info.image_dir, ec);
  if (ec) throw MotIoError("cannot create image directory: " + ec.message());
  for (int frame = 1; frame <= spec.frames; ++frame) {
    try {
      write_image(frame_image_path(dir, info, frame), render_frame(spec, frame));
    } catch (const ImageError& e) {
      throw MotIoError(e.what());
    }
  }
}

ScenarioSpec lanes_scenario(int targets, int frames, std::uint64_t seed) {
  if (targets <= 0 || frames <= 0) throw ScenarioError("lanes scenario needs targets and frames");
  ScenarioSpec spec;
  spec.name = "lanes";
  spec.seed = seed;
  spec.geometry = {1920.0, 1080.0};
  spec.frames = frames;
  const double lane = spec.geometry.height / targets;
  const double h = std::min(72.0, 0.7 * lane);
  const double w = h / 2.4;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < targets; ++i) {
    TargetSpec t;
    t.id = i + 1;
    t.appearance = i;
    t.entry = (i % 2 == 0) ? 0 : static_cast<int>(unit(rng) * frames / 5);
    t.exit = frames;
    const double speed = 0.5 + 1.5 * unit(rng);
    const double vx = (unit(rng) < 0.5 ? -1.0 : 1.0) * speed;
    const double travel = std::abs(vx) * (t.exit - t.entry);
    const double margin = 10.0;
    const double span = std::max(0.0, spec.geometry.width - w - 2 * margin - travel);
    double x = margin + unit(rng) * span;
    if (vx < 0) x += travel;
    t.initial = {x, i * lane + (lane - h) / 2, w, h};
    t.velocity = {vx, 0.0};
    spec.targets.push_back(t);
  }
  return spec;
}

namespace {
constexpr int kCrossMeet = 60;
constexpr int kCrossApproach = 3;
constexpr int kCrossRetreat = 1;
constexpr double kCrossWidth = 30.0;
constexpr double kCrossHeight = 72.0;
}  // namespace

ScenarioSpec crossing_scenario() {
  ScenarioSpec spec;
  spec.name = "crossing";
  spec.seed = 1;
  spec.geometry = {960.0, 540.0};
  const double center = 480.0;
  const double left_at_meet = center - kCrossWidth / 2;
  // boxes overlap while |xa - xb| < width: closing at 2 * approach, opening at 2 * retreat
  const int hide_from = kCrossMeet - static_cast<int>(std::ceil(kCrossWidth / (2 * kCrossApproach))) + 1;
  const int hide_to = kCrossMeet + static_cast<int>(std::ceil(kCrossWidth / (2 * kCrossRetreat)));
  spec.frames = hide_to + 60;

  TargetSpec a;
  a.id = 1;
  a.appearance = 0;
  a.entry = 0;
  a.exit = spec.frames;
  a.initial = {left_at_meet - kCrossApproach * kCrossMeet, 234.0, kCrossWidth, kCrossHeight};
  a.velocity = {kCrossApproach, 0.0};
  a.changes = {{kCrossMeet, Eigen::Vector2d(-kCrossRetreat, 0.0)}};
  a.hidden = {{hide_from, hide_to}};

  TargetSpec b = a;
  b.id = 2;
  b.appearance = 1;
  b.initial.x = left_at_meet + kCrossApproach * kCrossMeet;
  b.velocity = {-kCrossApproach, 0.0};
  b.changes = {{kCrossMeet, Eigen::Vector2d(kCrossRetreat, 0.0)}};

  spec.targets = {a, b};
  return spec;
}

int crossing_reappear_frame(const ScenarioSpec& crossing) {
  if (crossing.targets.empty() || crossing.targets.front().hidden.empty()) {
    throw ScenarioError("not a crossing scenario");
  }
  return crossing.targets.front().hidden.front().second;
}

ScenarioSpec occlusion_scenario(int hidden_frames, int frames) {
  constexpr int kHideFrom = 60;
  if (hidden_frames < 0 || kHideFrom + hidden_frames + 10 > frames) {
    throw ScenarioError("occlusion scenario too short for the hidden span");
  }
  ScenarioSpec spec;
  spec.name = "occlusion";
  spec.geometry = {960.0, 540.0};
  spec.frames = frames;
  TargetSpec t;
  t.id = 1;
  t.appearance = 3;
  t.entry = 0;
  t.exit = frames;
  t.initial = {60.0, 150.0, 30.0, 72.0};
  t.velocity = {2.0, 0.5};
  if (hidden_frames > 0) t.hidden = {{kHideFrom, kHideFrom + hidden_frames}};
  spec.targets = {t};
  return spec;
}

ScenarioSpec crowd_scenario(int per_frame, int frames, std::uint64_t seed, ImageGeometry<double> geometry) {
  if (per_frame <= 0 || frames <= 0) throw ScenarioError("crowd scenario needs a density and frames");
  constexpr int kMinLife = 150;
  constexpr int kMaxLife = 450;
  constexpr double kMeanLife = (kMinLife + kMaxLife) / 2.0;
  ScenarioSpec spec;
  spec.name = "crowd";
  spec.seed = seed;
  spec.geometry = geometry;
  spec.frames = frames;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> life(kMinLife, kMaxLife);
  // a lifetime drawn over [-L, frames) overlaps a given frame with
  // probability about L / (frames + L)
  const int count = static_cast<int>(std::lround(per_frame * (frames + kMeanLife) / kMeanLife));
  for (int i = 0; i < count; ++i) {
    const int length = life(rng);
    const int start = static_cast<int>(std::floor(unit(rng) * (frames + length))) - length;
    TargetSpec t;
    t.id = i + 1;
    t.appearance = i;
    t.entry = std::max(0, start);
    t.exit = std::min(frames, start + length);
    if (t.exit <= t.entry) t.exit = t.entry + 1;
    if (t.exit > frames) {
      t.entry = frames - 1;
      t.exit = frames;
    }
    const double w = 20.0 + 30.0 * unit(rng);
    const double h = 2.4 * w;
    const double x0 = unit(rng) * (geometry.width - w);
    const double y0 = unit(rng) * (geometry.height - h);
    const double x1 = unit(rng) * (geometry.width - w);
    const double y1 = unit(rng) * (geometry.height - h);
    t.velocity = {(x1 - x0) / length, (y1 - y0) / length};
    // position at frame `start` is (x0, y0), shifted to the clipped entry
    const double lead = t.entry - start;
    t.initial = {x0 + lead * t.velocity.x(), y0 + lead * t.velocity.y(), w, h};
    spec.targets.push_back(t);
  }
  return spec;
}

namespace {

Box parse_box(const std::string& text, const std::string& what) {
  const auto v = parse_number_list(text, what);
  if (v.size() != 4) throw ScenarioError(what + ": expected x, y, w, h");
  return {v[0], v[1], v[2], v[3]};
}

Eigen::Vector2d parse_vec2(const std::string& text, const std::string& what) {
  const auto v = parse_number_list(text, what);
  if (v.size() != 2) throw ScenarioError(what + ": expected two numbers");
  return {v[0], v[1]};
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (item.find_first_not_of(" \t") != std::string::npos) out.push_back(item);
  }
  return out;
}

}  // namespace

ScenarioSpec scenario_from_ini(const IniDocument& doc) {
  ScenarioSpec spec;
  try {
    const std::string s = "scene";
    const int frames = static_cast<int>(doc.get_int(s, "frames").value_or(spec.frames));
    const auto seed = static_cast<std::uint64_t>(doc.get_int(s, "seed").value_or(1));
    const std::string generator = doc.get(s, "generator").value_or("none");
    if (generator == "lanes") {
      spec = lanes_scenario(static_cast<int>(doc.get_int(s, "targets").value_or(10)), frames, seed);
    } else if (generator == "crowd") {
      ImageGeometry<double> g{doc.get_double(s, "width").value_or(1920.0), doc.get_double(s, "height").value_or(1080.0)};
      spec = crowd_scenario(static_cast<int>(doc.get_int(s, "density").value_or(50)), frames, seed, g);
    } else if (generator == "crossing") {
      spec = crossing_scenario();
    } else if (generator == "occlusion") {
      spec = occlusion_scenario(static_cast<int>(doc.get_int(s, "hidden").value_or(10)), frames);
    } else if (generator == "none") {
      spec.frames = frames;
      spec.seed = seed;
      spec.geometry = {doc.get_double(s, "width").value_or(spec.geometry.width),
                       doc.get_double(s, "height").value_or(spec.geometry.height)};
    } else {
      throw ScenarioError("unknown scene generator '" + generator + "'");
    }
    spec.seed = seed;
    if (auto v = doc.get(s, "name")) spec.name = *v;
    spec.noise.jitter_std = doc.get_double(s, "jitter").value_or(spec.noise.jitter_std);
    spec.noise.dropout = doc.get_double(s, "dropout").value_or(spec.noise.dropout);
    spec.noise.clutter_rate = doc.get_double(s, "clutter").value_or(spec.noise.clutter_rate);
    spec.noise.clutter_min_width = doc.get_double(s, "clutter_min_width").value_or(spec.noise.clutter_min_width);
    spec.noise.clutter_max_width = doc.get_double(s, "clutter_max_width").value_or(spec.noise.clutter_max_width);
    spec.noise.clutter_aspect = doc.get_double(s, "clutter_aspect").value_or(spec.noise.clutter_aspect);

    for (const std::string& section : doc.sections()) {
      if (section.rfind("target", 0) != 0) continue;
      const std::string where = "[" + section + "]";
      TargetSpec t;
      const std::string id_text = section.size() > 6 ? section.substr(6) : "";
      const auto ids = parse_number_list(id_text, where + " id");
      t.id = ids.size() == 1 ? static_cast<int>(ids[0]) : static_cast<int>(spec.targets.size()) + 1;
      t.entry = static_cast<int>(doc.get_int(section, "entry").value_or(0));
      t.exit = static_cast<int>(doc.get_int(section, "exit").value_or(spec.frames));
      const auto box = doc.get(section, "box");
      if (!box) throw ScenarioError(where + ": missing box");
      t.initial = parse_box(*box, where + " box");
      if (auto v = doc.get(section, "velocity")) t.velocity = parse_vec2(*v, where + " velocity");
      t.appearance = static_cast<int>(doc.get_int(section, "appearance").value_or(t.id));
      if (auto v = doc.get(section, "changes")) {
        for (const std::string& item : split(*v, ',')) {
          const auto parts = split(item, ':');
          if (parts.size() != 3) throw ScenarioError(where + ": changes items look like frame:vx:vy");
          const auto nums = parse_number_list(parts[0] + "," + parts[1] + "," + parts[2], where + " changes");
          t.changes.push_back({static_cast<int>(nums[0]), Eigen::Vector2d(nums[1], nums[2])});
        }
      }
      if (auto v = doc.get(section, "hidden")) {
        for (const std::string& item : split(*v, ',')) {
          const auto parts = split(item, '-');
          if (parts.size() != 2) throw ScenarioError(where + ": hidden items look like first-last");
          const auto nums = parse_number_list(parts[0] + "," + parts[1], where + " hidden");
          t.hidden.emplace_back(static_cast<int>(nums[0]), static_cast<int>(nums[1]));
        }
      }
      spec.targets.push_back(t);
    }
  } catch (const IniError& e) {
    throw ScenarioError(e.what());
  }
  spec.validate();
  return spec;
}

ScenarioSpec read_scenario(const std::filesystem::path& path) {
  try {
    return scenario_from_ini(IniDocument::read(path));
  } catch (const IniError& e) {
    throw ScenarioError(e.what());
  }
}

}  // namespace survtrack
