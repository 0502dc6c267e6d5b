#pragma once

// Brute-force references used by the unit and acceptance tests. Each one is
// written from the textbook definition and shares no code with the library
// beyond plain data types.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "survtrack/metrics.hpp"

namespace oracle {

/// Minimum total over all injective row->column maps (rows <= cols) or
/// column->row maps (cols < rows).
inline double brute_force_assignment(const Eigen::MatrixXd& c) {
  const bool wide = c.rows() <= c.cols();
  const Eigen::MatrixXd m = wide ? c : Eigen::MatrixXd(c.transpose());
  const int n = static_cast<int>(m.rows());
  const int k = static_cast<int>(m.cols());
  if (n == 0) return 0.0;
  std::vector<int> cols(k);
  std::iota(cols.begin(), cols.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  // every permutation of the columns; the first n positions are the choice
  do {
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += m(i, cols[i]);
    best = std::min(best, total);
  } while (std::next_permutation(cols.begin(), cols.end()));
  return best;
}

/// Axis-aligned overlap by counting unit cells of an integer grid.
inline double cell_count_iou(int ax, int ay, int aw, int ah, int bx, int by, int bw, int bh) {
  long inter = 0, uni = 0;
  const int x0 = std::min(ax, bx), x1 = std::max(ax + aw, bx + bw);
  const int y0 = std::min(ay, by), y1 = std::max(ay + ah, by + bh);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      const bool in_a = x >= ax && x < ax + aw && y >= ay && y < ay + ah;
      const bool in_b = x >= bx && x < bx + bw && y >= by && y < by + bh;
      inter += in_a && in_b;
      uni += in_a || in_b;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

/// Textbook Kalman filter with an explicit inverse.
struct TextbookKalman {
  Eigen::VectorXd x;
  Eigen::MatrixXd p;

  void predict(const Eigen::MatrixXd& f, const Eigen::MatrixXd& q) {
    x = f * x;
    p = f * p * f.transpose() + q;
  }

  void update(const Eigen::MatrixXd& h, const Eigen::MatrixXd& r, const Eigen::VectorXd& z) {
    const Eigen::MatrixXd s = h * p * h.transpose() + r;
    const Eigen::MatrixXd k = p * h.transpose() * s.inverse();
    x = x + k * (z - h * x);
    const Eigen::MatrixXd i = Eigen::MatrixXd::Identity(p.rows(), p.cols());
    p = (i - k * h) * p;
  }
};

/// Overlap of two boxes given as (x, y, w, h), from the definition.
inline double plain_iou(const survtrack::Box& a, const survtrack::Box& b) {
  const double iw = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double ih = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = iw * ih;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni > 0 ? inter / uni : 0.0;
}

struct FrameMatchValue {
  int count = 0;
  double iou_sum = 0.0;
};

/// Best (count, total IoU) over every partial matching of one frame, pairs
/// restricted to IoU >= threshold, compared lexicographically.
inline FrameMatchValue brute_force_frame_matching(const std::vector<survtrack::LabeledBox>& gt,
                                                  const std::vector<survtrack::LabeledBox>& hyp, double threshold) {
  FrameMatchValue best;
  std::vector<char> used(hyp.size(), 0);
  FrameMatchValue cur;
  auto better = [](const FrameMatchValue& a, const FrameMatchValue& b) {
    return a.count > b.count || (a.count == b.count && a.iou_sum > b.iou_sum + 1e-12);
  };
  auto rec = [&](auto&& self, std::size_t i) -> void {
    if (i == gt.size()) {
      if (better(cur, best)) best = cur;
      return;
    }
    self(self, i + 1);  // gt i unmatched
    for (std::size_t j = 0; j < hyp.size(); ++j) {
      if (used[j]) continue;
      const double v = plain_iou(gt[i].box, hyp[j].box);
      if (v < threshold) continue;
      used[j] = 1;
      ++cur.count;
      cur.iou_sum += v;
      self(self, i + 1);
      --cur.count;
      cur.iou_sum -= v;
      used[j] = 0;
    }
  };
  rec(rec, 0);
  return best;
}

/// IDF1 by trying every injective map from gt identities to hypothesis ids.
inline double brute_force_idf1(const survtrack::LabeledFrames& gt, const survtrack::LabeledFrames& hyp,
                               double threshold) {
  std::set<int> gids, hids;
  long n_gt = 0, n_hyp = 0;
  for (const auto& [f, v] : gt) {
    for (const auto& b : v) gids.insert(b.id);
    n_gt += static_cast<long>(v.size());
  }
  for (const auto& [f, v] : hyp) {
    for (const auto& b : v) hids.insert(b.id);
    n_hyp += static_cast<long>(v.size());
  }
  if (n_gt + n_hyp == 0) return 1.0;
  const std::vector<int> g(gids.begin(), gids.end());
  std::vector<int> h(hids.begin(), hids.end());
  // shared[g][h]: frames where both exist and overlap
  std::map<std::pair<int, int>, long> shared;
  for (const auto& [f, gv] : gt) {
    const auto it = hyp.find(f);
    if (it == hyp.end()) continue;
    for (const auto& gb : gv) {
      for (const auto& hb : it->second) {
        if (plain_iou(gb.box, hb.box) >= threshold) ++shared[{gb.id, hb.id}];
      }
    }
  }
  long best = 0;
  // assign each gt identity to a distinct hyp id or to nothing (-1)
  std::vector<char> used(h.size(), 0);
  auto rec = [&](auto&& self, std::size_t i, long acc) -> void {
    if (i == g.size()) {
      best = std::max(best, acc);
      return;
    }
    self(self, i + 1, acc);
    for (std::size_t j = 0; j < h.size(); ++j) {
      if (used[j]) continue;
      used[j] = 1;
      const auto it = shared.find({g[i], h[j]});
      self(self, i + 1, acc + (it == shared.end() ? 0 : it->second));
      used[j] = 0;
    }
  };
  rec(rec, 0, 0);
  return 2.0 * static_cast<double>(best) / static_cast<double>(n_gt + n_hyp);
}

}  // namespace oracle
