#include "survtrack/pipeline.hpp"

#include <algorithm>
#include <future>
#include <stdexcept>
#include <string>

namespace survtrack {

namespace {

using Clock = std::chrono::steady_clock;

struct IngestedFrame {
  int frame = 0;
  std::vector<Detection> detections;
  std::vector<int> source_index;  // position within the frame's input records
};

struct Chunk {
  std::vector<IngestedFrame> frames;
  std::vector<std::vector<MaybeFingerprint>> fingerprints;
  std::uint64_t dropped_low_confidence = 0;
  std::uint64_t dropped_degenerate = 0;
  std::chrono::nanoseconds ingest{0};
  std::chrono::nanoseconds embed{0};
};

class ChunkProducer {
 public:
  ChunkProducer(const FrameMap<DetectionRecord>& detections, const AppearanceSource& appearance,
                const TrackerConfig& config)
      : detections_(detections), appearance_(appearance), config_(config) {}

  Chunk operator()(int first, int last) const {
    Chunk chunk;
    const auto t0 = Clock::now();
    std::vector<BufferedFrame> buffer;
    for (int f = first; f <= last; ++f) {
      IngestedFrame in;
      in.frame = f;
      if (const auto it = detections_.find(f); it != detections_.end()) {
        for (std::size_t i = 0; i < it->second.size(); ++i) {
          const DetectionRecord& r = it->second[i];
          if (r.confidence < config_.min_confidence) {
            ++chunk.dropped_low_confidence;
            continue;
          }
          if (r.box.degenerate() || !r.box.valid()) {
            ++chunk.dropped_degenerate;
            continue;
          }
          in.detections.push_back({r.box, r.confidence});
          in.source_index.push_back(static_cast<int>(i));
        }
      }
      if (appearance_.kind == AppearanceSource::Kind::patches) {
        BufferedFrame bf;
        bf.frame = f;
        bf.patches.resize(in.detections.size());
        if (!in.detections.empty()) {
          if (const auto image = appearance_.loader ? appearance_.loader(f) : std::nullopt) {
            for (std::size_t d = 0; d < in.detections.size(); ++d) {
              try {
                bf.patches[d] = extract_patch(*image, in.detections[d].box, appearance_.patch_shape);
              } catch (const FingerprintError&) {
                // box entirely outside the frame: no pixels, null fingerprint
              }
            }
          }
        }
        buffer.push_back(std::move(bf));
      }
      chunk.frames.push_back(std::move(in));
    }
    const auto t1 = Clock::now();
    chunk.ingest = t1 - t0;

    chunk.fingerprints.resize(chunk.frames.size());
    switch (appearance_.kind) {
      case AppearanceSource::Kind::none:
        break;
      case AppearanceSource::Kind::sidecar:
        for (std::size_t k = 0; k < chunk.frames.size(); ++k) {
          const IngestedFrame& in = chunk.frames[k];
          auto& fps = chunk.fingerprints[k];
          fps.reserve(in.detections.size());
          for (int src : in.source_index) fps.push_back(appearance_.sidecar->lookup(in.frame, src));
        }
        break;
      case AppearanceSource::Kind::patches: {
        auto embedded = buffered_inference(buffer, *appearance_.provider);
        for (std::size_t k = 0; k < embedded.size(); ++k) chunk.fingerprints[k] = std::move(embedded[k].fingerprints);
        break;
      }
    }
    chunk.embed = Clock::now() - t1;
    return chunk;
  }

 private:
  const FrameMap<DetectionRecord>& detections_;
  const AppearanceSource& appearance_;
  const TrackerConfig& config_;
};

void check_dimension(const AppearanceSource& appearance, const TrackerConfig& config) {
  int dim = config.fingerprint_dim;
  if (appearance.kind == AppearanceSource::Kind::patches) {
    if (!appearance.provider) throw std::invalid_argument("patch appearance source needs a provider");
    dim = appearance.provider->dimension();
  } else if (appearance.kind == AppearanceSource::Kind::sidecar) {
    if (!appearance.sidecar) throw std::invalid_argument("sidecar appearance source needs a sidecar");
    dim = appearance.sidecar->size() == 0 ? config.fingerprint_dim : appearance.sidecar->dimension();
  }
  if (dim != config.fingerprint_dim) {
    throw std::invalid_argument("fingerprint dimension " + std::to_string(dim) + " does not match configured " +
                                std::to_string(config.fingerprint_dim));
  }
}

}  // namespace

RunSummary run_stream(const FrameMap<DetectionRecord>& detections, const AppearanceSource& appearance,
                      const TrackerConfig& config, const ResultSink& sink, const StreamOptions& options) {
  config.validate();
  check_dimension(appearance, config);
  const auto start = Clock::now();
  RunSummary summary;
  const int first = options.first_frame;
  int last = options.last_frame.value_or(detections.empty() ? first - 1 : detections.rbegin()->first);
  if (!detections.empty() && detections.begin()->first < first) {
    throw TrackerError("detections reference frame " + std::to_string(detections.begin()->first) +
                       " before the first frame " + std::to_string(first));
  }
  if (!detections.empty() && detections.rbegin()->first > last) {
    throw TrackerError("detections reference frame " + std::to_string(detections.rbegin()->first) +
                       " beyond the last frame " + std::to_string(last));
  }

  Tracker tracker(config);
  const std::uint64_t calls0 = appearance.provider ? appearance.provider->evaluations() : 0;
  const std::uint64_t batches0 = appearance.provider ? appearance.provider->batches() : 0;
  const ChunkProducer produce(detections, appearance, config);
  const auto policy = options.concurrent ? std::launch::async : std::launch::deferred;
  const int b = config.buffer;

  std::future<Chunk> pending;
  if (first <= last) pending = std::async(policy, produce, first, std::min(last, first + b - 1));
  for (int chunk_first = first; chunk_first <= last; chunk_first += b) {
    Chunk chunk = pending.get();
    const int next = chunk_first + b;
    if (next <= last) pending = std::async(policy, produce, next, std::min(last, next + b - 1));

    summary.dropped_low_confidence += chunk.dropped_low_confidence;
    summary.dropped_degenerate += chunk.dropped_degenerate;
    summary.stages.ingest += chunk.ingest;
    summary.stages.embed += chunk.embed;
    for (std::size_t k = 0; k < chunk.frames.size(); ++k) {
      const IngestedFrame& in = chunk.frames[k];
      const auto& fps = chunk.fingerprints[k];
      for (const auto& fp : fps) summary.null_fingerprints += fp ? 0 : 1;
      const FrameResult result = tracker.step(in.frame, in.detections, fps);
      const auto t0 = Clock::now();
      if (sink) sink(result);
      summary.stages.write += Clock::now() - t0;
    }
  }

  const TrackerStats& st = tracker.stats();
  summary.frames = st.frames;
  summary.detections = st.detections;
  summary.tracks_created = st.tracks_created;
  summary.tracks_deleted = st.tracks_deleted;
  summary.kalman_resets = st.kalman_resets;
  summary.stages.associate = st.associate_time;
  summary.stages.update = st.update_time;
  if (appearance.provider) {
    summary.embedder_calls = appearance.provider->evaluations() - calls0;
    summary.embedder_batches = appearance.provider->batches() - batches0;
  }
  summary.wall = Clock::now() - start;
  return summary;
}

}  // namespace survtrack
