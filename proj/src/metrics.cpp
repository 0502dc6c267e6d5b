#include "survtrack/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include <Eigen/Core>

#include "survtrack/association.hpp"

namespace survtrack {

namespace {

LabeledFrames to_frames(const FrameMap<GroundTruthRecord>& records, bool considered_only) {
  LabeledFrames out;
  for (const auto& [frame, list] : records) {
    auto& dst = out[frame];
    for (const auto& r : list) {
      if (considered_only && !r.consider) continue;
      dst.push_back({r.id, r.box});
    }
  }
  return out;
}

const std::vector<LabeledBox> kNoBoxes;

const std::vector<LabeledBox>& boxes_at(const LabeledFrames& frames, int frame) {
  const auto it = frames.find(frame);
  return it == frames.end() ? kNoBoxes : it->second;
}

}  // namespace

LabeledFrames ground_truth_frames(const FrameMap<GroundTruthRecord>& records) { return to_frames(records, true); }
LabeledFrames hypothesis_frames(const FrameMap<GroundTruthRecord>& records) { return to_frames(records, false); }

std::vector<std::pair<int, int>> optimal_frame_matching(std::span<const LabeledBox> gt,
                                                        std::span<const LabeledBox> hyp, double threshold) {
  const auto n = static_cast<Eigen::Index>(gt.size());
  const auto m = static_cast<Eigen::Index>(hyp.size());
  if (n == 0 || m == 0) return {};
  // An invalid pair costs more than any complete set of valid ones, so the
  // solver first maximizes the number of valid pairs, then their total IoU.
  const double invalid = 2.0 * static_cast<double>(std::min(n, m)) + 1.0;
  Eigen::MatrixXd overlap(n, m);
  Eigen::MatrixXd cost(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      overlap(i, j) = iou(gt[i].box, hyp[j].box);
      cost(i, j) = overlap(i, j) >= threshold ? 1.0 - overlap(i, j) : invalid;
    }
  }
  std::vector<std::pair<int, int>> out;
  for (const auto& [i, j] : solve_assignment(cost)) {
    if (overlap(i, j) >= threshold) out.emplace_back(i, j);
  }
  return out;
}

std::vector<std::pair<int, int>> ClearMotAccumulator::add_frame(std::span<const LabeledBox> gt,
                                                                std::span<const LabeledBox> hyp) {
  std::vector<char> gt_used(gt.size(), 0), hyp_used(hyp.size(), 0);
  std::vector<std::pair<int, int>> chosen;

  for (std::size_t i = 0; i < gt.size(); ++i) {
    const auto prev = last_match_.find(gt[i].id);
    if (prev == last_match_.end()) continue;
    for (std::size_t j = 0; j < hyp.size(); ++j) {
      if (hyp_used[j] || hyp[j].id != prev->second) continue;
      if (iou(gt[i].box, hyp[j].box) >= threshold_) {
        gt_used[i] = hyp_used[j] = 1;
        chosen.emplace_back(static_cast<int>(i), static_cast<int>(j));
      }
      break;
    }
  }

  std::vector<LabeledBox> rest_gt, rest_hyp;
  std::vector<int> gt_index, hyp_index;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!gt_used[i]) {
      rest_gt.push_back(gt[i]);
      gt_index.push_back(static_cast<int>(i));
    }
  }
  for (std::size_t j = 0; j < hyp.size(); ++j) {
    if (!hyp_used[j]) {
      rest_hyp.push_back(hyp[j]);
      hyp_index.push_back(static_cast<int>(j));
    }
  }
  for (const auto& [a, b] : optimal_frame_matching(rest_gt, rest_hyp, threshold_)) {
    const int i = gt_index[a];
    const int j = hyp_index[b];
    const auto prev = last_match_.find(gt[i].id);
    if (prev != last_match_.end() && prev->second != hyp[j].id) ++counts_.id_switches;
    chosen.emplace_back(i, j);
  }
  std::sort(chosen.begin(), chosen.end());

  for (const auto& [i, j] : chosen) {
    last_match_[gt[i].id] = hyp[j].id;
    counts_.iou_sum += iou(gt[i].box, hyp[j].box);
  }
  counts_.gt += static_cast<std::int64_t>(gt.size());
  counts_.hypotheses += static_cast<std::int64_t>(hyp.size());
  counts_.matches += static_cast<std::int64_t>(chosen.size());
  counts_.misses += static_cast<std::int64_t>(gt.size() - chosen.size());
  counts_.false_positives += static_cast<std::int64_t>(hyp.size() - chosen.size());
  return chosen;
}

IdentityOverlap identity_overlap(const LabeledFrames& gt, const LabeledFrames& hyp, double threshold) {
  std::set<int> gt_set, hyp_set, frames;
  for (const auto& [f, list] : gt) {
    frames.insert(f);
    for (const auto& b : list) gt_set.insert(b.id);
  }
  for (const auto& [f, list] : hyp) {
    frames.insert(f);
    for (const auto& b : list) hyp_set.insert(b.id);
  }
  IdentityOverlap out;
  out.gt_ids.assign(gt_set.begin(), gt_set.end());
  out.hyp_ids.assign(hyp_set.begin(), hyp_set.end());
  out.gt_counts.assign(out.gt_ids.size(), 0);
  out.hyp_counts.assign(out.hyp_ids.size(), 0);
  out.shared.assign(out.gt_ids.size(), std::vector<std::int64_t>(out.hyp_ids.size(), 0));
  auto index_of = [](const std::vector<int>& ids, int id) {
    return static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
  };
  for (int f : frames) {
    const auto& g = boxes_at(gt, f);
    const auto& h = boxes_at(hyp, f);
    for (const auto& gb : g) ++out.gt_counts[index_of(out.gt_ids, gb.id)];
    for (const auto& hb : h) ++out.hyp_counts[index_of(out.hyp_ids, hb.id)];
    for (const auto& gb : g) {
      const std::size_t gi = index_of(out.gt_ids, gb.id);
      for (const auto& hb : h) {
        if (iou(gb.box, hb.box) >= threshold) ++out.shared[gi][index_of(out.hyp_ids, hb.id)];
      }
    }
  }
  return out;
}

IdentityCounts identity_counts(const IdentityOverlap& overlap) {
  IdentityCounts out;
  std::int64_t total_gt = 0, total_hyp = 0;
  for (auto c : overlap.gt_counts) total_gt += c;
  for (auto c : overlap.hyp_counts) total_hyp += c;
  const auto n = static_cast<Eigen::Index>(overlap.gt_ids.size());
  const auto m = static_cast<Eigen::Index>(overlap.hyp_ids.size());
  if (n > 0 && m > 0) {
    std::int64_t peak = 0;
    for (const auto& row : overlap.shared) {
      for (auto v : row) peak = std::max(peak, v);
    }
    // maximizing shared frames == minimizing (peak - shared) at fixed size
    Eigen::MatrixXd cost(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) cost(i, j) = static_cast<double>(peak - overlap.shared[i][j]);
    }
    for (const auto& [i, j] : solve_assignment(cost)) {
      const std::int64_t s = overlap.shared[i][j];
      if (s == 0) continue;
      out.idtp += s;
      out.pairs.emplace_back(overlap.gt_ids[i], overlap.hyp_ids[j]);
    }
  }
  out.idfn = total_gt - out.idtp;
  out.idfp = total_hyp - out.idtp;
  return out;
}

ScoreReport evaluate(const LabeledFrames& gt, const LabeledFrames& hyp, double iou_threshold) {
  ScoreReport report;
  ClearMotAccumulator acc(iou_threshold);
  std::set<int> frames;
  for (const auto& [f, list] : gt) frames.insert(f);
  for (const auto& [f, list] : hyp) frames.insert(f);
  for (int f : frames) acc.add_frame(boxes_at(gt, f), boxes_at(hyp, f));
  report.clear = acc.counts();
  report.identity = identity_counts(identity_overlap(gt, hyp, iou_threshold));

  const auto& c = report.clear;
  report.defined = c.gt > 0;
  if (report.defined) {
    report.mota = 1.0 - static_cast<double>(c.misses + c.false_positives + c.id_switches) / static_cast<double>(c.gt);
    const auto& id = report.identity;
    report.idf1 = 2.0 * static_cast<double>(id.idtp) / static_cast<double>(2 * id.idtp + id.idfp + id.idfn);
  }
  report.motp = c.matches > 0 ? c.iou_sum / static_cast<double>(c.matches) : 0.0;
  return report;
}

ScoreReport evaluate(const FrameMap<GroundTruthRecord>& gt, const FrameMap<GroundTruthRecord>& hyp,
                     double iou_threshold) {
  return evaluate(ground_truth_frames(gt), hypothesis_frames(hyp), iou_threshold);
}

std::string format_report_table(const ScoreReport& r, const std::string& name) {
  char buf[512];
  std::string out;
  std::snprintf(buf, sizeof(buf), "%-16s %8s %8s %8s %8s %8s %6s %8s\n", "sequence", "MOTA", "MOTP", "IDF1", "FP",
                "FN", "IDSW", "GT");
  out += buf;
  if (!r.defined) {
    std::snprintf(buf, sizeof(buf), "%-16s %8s %8s %8s %8lld %8lld %6lld %8lld\n", name.c_str(), "n/a", "n/a", "n/a",
                  static_cast<long long>(r.clear.false_positives), static_cast<long long>(r.clear.misses),
                  static_cast<long long>(r.clear.id_switches), static_cast<long long>(r.clear.gt));
  } else {
    std::snprintf(buf, sizeof(buf), "%-16s %8.3f %8.3f %8.3f %8lld %8lld %6lld %8lld\n", name.c_str(), r.mota, r.motp,
                  r.idf1, static_cast<long long>(r.clear.false_positives), static_cast<long long>(r.clear.misses),
                  static_cast<long long>(r.clear.id_switches), static_cast<long long>(r.clear.gt));
  }
  out += buf;
  return out;
}

std::string summary_header() { return "name,MOTA,MOTP,IDF1,FP,FN,IDSW,GT,matches,IDTP,IDFP,IDFN"; }

std::string format_summary_line(const ScoreReport& r, const std::string& name) {
  char buf[512];
  auto metric = [&](double v) -> std::string {
    if (!r.defined) return "nan";
    char b[32];
    std::snprintf(b, sizeof(b), "%.6f", v);
    return b;
  };
  std::snprintf(buf, sizeof(buf), "%s,%s,%.6f,%s,%lld,%lld,%lld,%lld,%lld,%lld,%lld,%lld", name.c_str(),
                metric(r.mota).c_str(), r.motp, metric(r.idf1).c_str(),
                static_cast<long long>(r.clear.false_positives), static_cast<long long>(r.clear.misses),
                static_cast<long long>(r.clear.id_switches), static_cast<long long>(r.clear.gt),
                static_cast<long long>(r.clear.matches), static_cast<long long>(r.identity.idtp),
                static_cast<long long>(r.identity.idfp), static_cast<long long>(r.identity.idfn));
  return buf;
}

}  // namespace survtrack
