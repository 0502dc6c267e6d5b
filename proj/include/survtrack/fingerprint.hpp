#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "survtrack/geometry.hpp"
#include "survtrack/image.hpp"

namespace survtrack {

using Fingerprint = Eigen::VectorXd;
/// std::nullopt is the "null" fingerprint: no patch, failed provider, or a
/// zero vector. Null fingerprints never enter a similarity computation.
using MaybeFingerprint = std::optional<Fingerprint>;

inline constexpr int kDefaultFingerprintDim = 100;

class FingerprintError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PatchShape {
  int height = 60;
  int width = 35;
  friend bool operator==(const PatchShape&, const PatchShape&) = default;
};

/// Color patch, one height x width plane per channel, values in [0, 1].
struct Patch {
  std::array<Eigen::ArrayXXf, 3> channels;

  int height() const { return static_cast<int>(channels[0].rows()); }
  int width() const { return static_cast<int>(channels[0].cols()); }
  PatchShape shape() const { return {height(), width()}; }

  static Patch filled(PatchShape shape, float value);
};

/// Crops `box` out of `frame` and bilinearly resamples it to `shape`. Samples
/// that fall outside the image are zero. Throws FingerprintError when the
/// box does not overlap the image at all.
Patch extract_patch(const Image& frame, const Box& box, PatchShape shape = {});

/// Wraps a non-zero finite vector; anything else becomes null.
MaybeFingerprint make_fingerprint(Fingerprint values);

/// (a.b / (|a||b|))^2. Parallel and antiparallel vectors both score 1.
template <typename DerivedA, typename DerivedB>
double squared_cosine_similarity(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size()) throw FingerprintError("fingerprint dimensions differ");
  const double na = a.squaredNorm();
  const double nb = b.squaredNorm();
  if (!(na > 0.0) || !(nb > 0.0)) throw FingerprintError("zero-norm fingerprint");
  const double dot = a.dot(b);
  return std::clamp(dot * dot / (na * nb), 0.0, 1.0);
}

inline constexpr double kNullFingerprintCost = 0.5;

/// 1 - squared cosine similarity, or the neutral 0.5 when either side is null.
double fingerprint_cost(const MaybeFingerprint& a, const MaybeFingerprint& b);

/// Appearance backbone. Implementations embed one patch at a time; the base
/// class owns batching, failure handling and the evaluation counter.
class FingerprintProvider {
 public:
  virtual ~FingerprintProvider() = default;

  virtual int dimension() const = 0;

  /// One fingerprint per patch, order preserved. If the backbone throws, the
  /// whole batch comes back null.
  std::vector<MaybeFingerprint> embed_batch(std::span<const Patch> patches);

  /// Number of single-patch embeddings performed so far.
  std::uint64_t evaluations() const { return evaluations_.load(); }
  std::uint64_t batches() const { return batches_.load(); }
  void reset_counters() {
    evaluations_ = 0;
    batches_ = 0;
  }

 protected:
  virtual Fingerprint embed(const Patch& patch) const = 0;

 private:
  std::atomic<std::uint64_t> evaluations_{0};
  std::atomic<std::uint64_t> batches_{0};
};

struct HistogramEmbedderOptions {
  int grid_rows = 2;
  int grid_cols = 2;
  int bins = 8;
  int dimension = kDefaultFingerprintDim;
};

/// Deterministic stand-in for a learned backbone: linearly interpolated
/// per-channel intensity histograms over a spatial grid, truncated or
/// zero-padded to the declared dimension and L2-normalized.
class HistogramEmbedder final : public FingerprintProvider {
 public:
  explicit HistogramEmbedder(HistogramEmbedderOptions options = {});

  int dimension() const override { return options_.dimension; }
  const HistogramEmbedderOptions& options() const { return options_; }

  Fingerprint operator()(const Patch& patch) const { return embed(patch); }

 protected:
  Fingerprint embed(const Patch& patch) const override;

 private:
  HistogramEmbedderOptions options_;
};

/// One buffered frame awaiting embedding. `patches[i]` belongs to detection i
/// of the frame and is absent when no pixels were available for it.
struct BufferedFrame {
  int frame = 0;
  std::vector<std::optional<Patch>> patches;
};

struct FrameFingerprints {
  int frame = 0;
  std::vector<MaybeFingerprint> fingerprints;
};

/// Embeds every patch of the buffer with a single provider batch and hands
/// the results back per frame and detection index.
std::vector<FrameFingerprints> buffered_inference(std::span<const BufferedFrame> buffer,
                                                  FingerprintProvider& provider);

/// Precomputed fingerprints keyed by (frame, detection index within frame).
class FingerprintSidecar {
 public:
  FingerprintSidecar() = default;
  explicit FingerprintSidecar(int dimension) : dimension_(dimension) {}

  static FingerprintSidecar read(const std::filesystem::path& path);
  void write(const std::filesystem::path& path) const;

  int dimension() const { return dimension_; }
  std::size_t size() const { return entries_.size(); }
  void insert(int frame, int det_index, Fingerprint values);
  MaybeFingerprint lookup(int frame, int det_index) const;

 private:
  int dimension_ = 0;
  std::map<std::pair<int, int>, Fingerprint> entries_;
};

}  // namespace survtrack
