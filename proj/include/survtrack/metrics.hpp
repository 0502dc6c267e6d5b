#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "survtrack/geometry.hpp"
#include "survtrack/mot_io.hpp"

namespace survtrack {

struct LabeledBox {
  int id = 0;
  Box box;
};

/// Boxes of one sequence keyed by frame.
using LabeledFrames = std::map<int, std::vector<LabeledBox>>;

/// Ground truth keeps only records flagged for consideration; hypotheses keep
/// every record.
LabeledFrames ground_truth_frames(const FrameMap<GroundTruthRecord>& records);
LabeledFrames hypothesis_frames(const FrameMap<GroundTruthRecord>& records);

/// Optimal IoU matching of one frame: the largest number of pairs with
/// IoU >= threshold, then the largest total IoU among those. Returns indices
/// (gt, hyp) into the two spans, sorted by gt index.
std::vector<std::pair<int, int>> optimal_frame_matching(std::span<const LabeledBox> gt,
                                                        std::span<const LabeledBox> hyp, double threshold);

struct ClearMotCounts {
  std::int64_t gt = 0;
  std::int64_t hypotheses = 0;
  std::int64_t matches = 0;
  std::int64_t false_positives = 0;
  std::int64_t misses = 0;
  std::int64_t id_switches = 0;
  double iou_sum = 0.0;
};

/// Per-frame CLEAR-MOT matcher. Correspondences from earlier frames are kept
/// while their IoU stays at or above the threshold, even if a better
/// alternative exists; the rest is matched optimally.
class ClearMotAccumulator {
 public:
  explicit ClearMotAccumulator(double iou_threshold = 0.5) : threshold_(iou_threshold) {}

  /// Returns the (gt, hyp) index pairs chosen for this frame.
  std::vector<std::pair<int, int>> add_frame(std::span<const LabeledBox> gt, std::span<const LabeledBox> hyp);

  const ClearMotCounts& counts() const { return counts_; }

 private:
  double threshold_;
  std::map<int, int> last_match_;  // gt id -> hypothesis id, persists across gaps
  ClearMotCounts counts_;
};

struct IdentityCounts {
  std::int64_t idtp = 0;
  std::int64_t idfp = 0;
  std::int64_t idfn = 0;
  std::vector<std::pair<int, int>> pairs;  ///< matched (gt id, hypothesis id)
};

/// Overlap table: frames in which gt identity g and hypothesis h co-occur
/// with IoU >= threshold. Rows follow `gt_ids`, columns `hyp_ids`, both sorted.
struct IdentityOverlap {
  std::vector<int> gt_ids;
  std::vector<int> hyp_ids;
  std::vector<std::int64_t> gt_counts;
  std::vector<std::int64_t> hyp_counts;
  std::vector<std::vector<std::int64_t>> shared;
};

IdentityOverlap identity_overlap(const LabeledFrames& gt, const LabeledFrames& hyp, double threshold);
IdentityCounts identity_counts(const IdentityOverlap& overlap);

struct ScoreReport {
  bool defined = false;  ///< false when there is no ground truth
  double mota = 0.0;
  double motp = 0.0;
  double idf1 = 0.0;
  ClearMotCounts clear;
  IdentityCounts identity;
};

ScoreReport evaluate(const LabeledFrames& gt, const LabeledFrames& hyp, double iou_threshold = 0.5);
ScoreReport evaluate(const FrameMap<GroundTruthRecord>& gt, const FrameMap<GroundTruthRecord>& hyp,
                     double iou_threshold = 0.5);

/// Aligned human-readable table.
std::string format_report_table(const ScoreReport& report, const std::string& name = "sequence");
/// `name,MOTA,MOTP,IDF1,FP,FN,IDSW,GT,IDTP,IDFP,IDFN` style line, header first.
std::string summary_header();
std::string format_summary_line(const ScoreReport& report, const std::string& name = "sequence");

}  // namespace survtrack
