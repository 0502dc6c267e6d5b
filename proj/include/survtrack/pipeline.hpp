#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "survtrack/fingerprint.hpp"
#include "survtrack/image.hpp"
#include "survtrack/mot_io.hpp"
#include "survtrack/tracker.hpp"

namespace survtrack {

/// Supplies the decoded image of a 1-based frame, or nullopt when no pixels
/// are available for it.
using FrameLoader = std::function<std::optional<Image>(int frame)>;

/// Where detection fingerprints come from.
struct AppearanceSource {
  enum class Kind { none, patches, sidecar };

  Kind kind = Kind::none;
  FrameLoader loader;
  FingerprintProvider* provider = nullptr;
  PatchShape patch_shape;
  const FingerprintSidecar* sidecar = nullptr;

  static AppearanceSource geometry_only() { return {}; }
  static AppearanceSource from_patches(FrameLoader loader, FingerprintProvider& provider, PatchShape shape = {}) {
    AppearanceSource s;
    s.kind = Kind::patches;
    s.loader = std::move(loader);
    s.provider = &provider;
    s.patch_shape = shape;
    return s;
  }
  static AppearanceSource from_sidecar(const FingerprintSidecar& sidecar) {
    AppearanceSource s;
    s.kind = Kind::sidecar;
    s.sidecar = &sidecar;
    return s;
  }
};

struct StageTimes {
  std::chrono::nanoseconds ingest{0};  ///< filtering, image decode, patch extraction
  std::chrono::nanoseconds embed{0};
  std::chrono::nanoseconds associate{0};
  std::chrono::nanoseconds update{0};
  std::chrono::nanoseconds write{0};
};

struct RunSummary {
  std::uint64_t frames = 0;
  std::uint64_t detections = 0;  ///< after filtering, i.e. what the tracker saw
  std::uint64_t dropped_low_confidence = 0;
  std::uint64_t dropped_degenerate = 0;
  std::uint64_t tracks_created = 0;
  std::uint64_t tracks_deleted = 0;
  std::uint64_t embedder_calls = 0;
  std::uint64_t embedder_batches = 0;
  std::uint64_t null_fingerprints = 0;
  std::uint64_t kalman_resets = 0;
  StageTimes stages;
  std::chrono::nanoseconds wall{0};

  double seconds() const { return std::chrono::duration<double>(wall).count(); }
  double frames_per_second() const { return seconds() > 0 ? static_cast<double>(frames) / seconds() : 0.0; }
};

struct StreamOptions {
  int first_frame = 1;
  /// Last frame to process; defaults to the largest frame in the input.
  std::optional<int> last_frame;
  /// Run ingest and embedding of the next buffer on a worker thread while
  /// the current buffer is tracked.
  bool concurrent = true;
};

using ResultSink = std::function<void(const FrameResult&)>;

/// Buffers `config.buffer` frames, embeds them in one batch, then steps the
/// tracker through them in order and hands each FrameResult to `sink`.
/// Frames without detections inside the range are stepped with an empty list.
RunSummary run_stream(const FrameMap<DetectionRecord>& detections, const AppearanceSource& appearance,
                      const TrackerConfig& config, const ResultSink& sink, const StreamOptions& options = {});

}  // namespace survtrack
