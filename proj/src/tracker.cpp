#include "survtrack/tracker.hpp"

#include <algorithm>
#include <string>

namespace survtrack {

void TrackerConfig::validate() const {
  if (!weights.valid()) throw std::invalid_argument("association weights: alpha, beta >= 0 and gate > 0 required");
  if (timeout <= 0) throw std::invalid_argument("timeout must be a positive frame count");
  if (buffer < 1) throw std::invalid_argument("buffer must be at least one frame");
  if (!std::isfinite(min_confidence)) throw std::invalid_argument("min_confidence must be finite");
  if (!noise.valid()) throw std::invalid_argument("noise scales must be positive");
  if (fingerprint_dim <= 0) throw std::invalid_argument("fingerprint dimension must be positive");
  if (!geometry.valid()) throw std::invalid_argument("image geometry must have positive width and height");
}

Tracker::Tracker(TrackerConfig config) : config_(std::move(config)) { config_.validate(); }

FrameResult Tracker::step(int frame, std::span<const Detection> detections,
                          std::span<const MaybeFingerprint> fingerprints) {
  using Clock = std::chrono::steady_clock;
  if (last_frame_ && frame != *last_frame_ + 1) {
    throw TrackerError("frame " + std::to_string(frame) + " does not follow frame " + std::to_string(*last_frame_));
  }
  if (!fingerprints.empty() && fingerprints.size() != detections.size()) {
    throw TrackerError("fingerprint count does not match detection count");
  }
  for (const Detection& d : detections) {
    if (d.box.degenerate()) throw TrackerError("degenerate detection box in frame " + std::to_string(frame));
  }
  last_frame_ = frame;
  ++stats_.frames;
  stats_.detections += detections.size();

  const auto t0 = Clock::now();
  for (Track& t : tracks_) {
    t.motion = predict(t.motion, config_.noise);
    ++t.age;
    ++t.frames_since_update;
  }

  std::vector<Box> track_boxes;
  std::vector<MaybeFingerprint> track_fps;
  track_boxes.reserve(tracks_.size());
  track_fps.reserve(tracks_.size());
  for (const Track& t : tracks_) {
    track_boxes.push_back(t.box());
    track_fps.push_back(t.fingerprint);
  }
  std::vector<Box> det_boxes;
  det_boxes.reserve(detections.size());
  for (const Detection& d : detections) det_boxes.push_back(d.box);
  std::vector<MaybeFingerprint> det_fps(detections.size());
  if (!fingerprints.empty()) std::copy(fingerprints.begin(), fingerprints.end(), det_fps.begin());

  last_costs_ = build_cost_matrix(track_boxes, track_fps, det_boxes, det_fps, config_.weights, config_.geometry);
  stats_.similarity_evaluations += last_costs_.similarity_evaluations;
  last_association_ = associate(last_costs_);
  const auto t1 = Clock::now();

  for (const auto& [ti, di] : last_association_.pairs) {
    Track& t = tracks_[ti];
    try {
      t.motion = update(t.motion, detections[di].box, config_.noise);
    } catch (const KalmanError&) {
      t.motion = init_state(detections[di].box, config_.noise);
      ++stats_.kalman_resets;
    }
    if (det_fps[di]) t.fingerprint = det_fps[di];
    t.frames_since_update = 0;
    ++t.hit_count;
  }

  for (int di : last_association_.unassigned_detections) {
    Track t;
    t.id = next_id_++;
    t.motion = init_state(detections[di].box, config_.noise);
    t.fingerprint = det_fps[di];
    t.hit_count = 1;
    tracks_.push_back(std::move(t));
    ++stats_.tracks_created;
  }

  const auto stale = std::remove_if(tracks_.begin(), tracks_.end(), [&](const Track& t) {
    return t.frames_since_update > config_.timeout;
  });
  stats_.tracks_deleted += static_cast<std::uint64_t>(std::distance(stale, tracks_.end()));
  tracks_.erase(stale, tracks_.end());

  FrameResult result;
  result.frame = frame;
  result.tracks.reserve(tracks_.size());
  for (const Track& t : tracks_) {
    const bool updated = t.frames_since_update == 0;
    if (!updated && !config_.report_coasting) continue;
    result.tracks.push_back({t.id, t.box(), updated});
  }
  std::sort(result.tracks.begin(), result.tracks.end(),
            [](const TrackReport& a, const TrackReport& b) { return a.id < b.id; });
  stats_.associate_time += t1 - t0;
  stats_.update_time += Clock::now() - t1;
  return result;
}

}  // namespace survtrack
