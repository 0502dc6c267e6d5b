#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "survtrack/association.hpp"
#include "survtrack/fingerprint.hpp"
#include "survtrack/geometry.hpp"
#include "survtrack/kalman.hpp"

namespace survtrack {

class TrackerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Detection {
  Box box;
  double confidence = 1.0;
};

struct Track {
  int id = 0;
  MotionState<double> motion;
  MaybeFingerprint fingerprint;
  int frames_since_update = 0;
  int age = 0;
  int hit_count = 0;

  Box box() const { return state_to_box(motion); }
};

struct TrackerConfig {
  AssociationWeights weights;
  int timeout = 30;  ///< a track is deleted once frames_since_update exceeds this
  int buffer = 45;   ///< frames collected before one embedding batch runs
  double min_confidence = 0.0;
  bool report_coasting = true;
  NoiseConfig<double> noise;
  int fingerprint_dim = kDefaultFingerprintDim;
  ImageGeometry<double> geometry;

  /// Throws std::invalid_argument naming the first field out of range.
  void validate() const;
};

struct TrackReport {
  int id = 0;
  Box box;
  bool updated = false;  ///< false while coasting on prediction alone
};

struct FrameResult {
  int frame = 0;
  std::vector<TrackReport> tracks;
};

struct TrackerStats {
  std::uint64_t frames = 0;
  std::uint64_t detections = 0;
  std::uint64_t tracks_created = 0;
  std::uint64_t tracks_deleted = 0;
  std::uint64_t similarity_evaluations = 0;
  std::uint64_t kalman_resets = 0;
  std::chrono::nanoseconds associate_time{0};  ///< predict + cost matrix + solve + gate
  std::chrono::nanoseconds update_time{0};     ///< correct, spawn, age out, report
};

/// Online tracker: predict, associate, gate, update, spawn, delete. One
/// instance consumes frames strictly in order.
class Tracker {
 public:
  explicit Tracker(TrackerConfig config);

  /// `fingerprints` is either empty (geometry only) or one entry per
  /// detection. Frame ids must increase by exactly one between calls.
  FrameResult step(int frame, std::span<const Detection> detections,
                   std::span<const MaybeFingerprint> fingerprints = {});

  const TrackerConfig& config() const { return config_; }
  const std::vector<Track>& tracks() const { return tracks_; }
  const TrackerStats& stats() const { return stats_; }
  const CostMatrix& last_costs() const { return last_costs_; }
  const AssociationResult& last_association() const { return last_association_; }

 private:
  TrackerConfig config_;
  std::vector<Track> tracks_;
  std::optional<int> last_frame_;
  int next_id_ = 1;
  TrackerStats stats_;
  CostMatrix last_costs_;
  AssociationResult last_association_;
};

}  // namespace survtrack
