#include "survtrack/association.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace survtrack {

bool AssociationWeights::valid() const {
  return std::isfinite(alpha) && std::isfinite(beta) && std::isfinite(gate) && alpha >= 0.0 && beta >= 0.0 &&
         gate > 0.0;
}

CostMatrix build_cost_matrix(std::span<const Box> track_boxes, std::span<const MaybeFingerprint> track_fingerprints,
                             std::span<const Box> detection_boxes,
                             std::span<const MaybeFingerprint> detection_fingerprints,
                             const AssociationWeights& weights, const ImageGeometry<double>& geometry) {
  if (track_boxes.size() != track_fingerprints.size() || detection_boxes.size() != detection_fingerprints.size()) {
    throw std::invalid_argument("box and fingerprint counts differ");
  }
  const auto n = static_cast<Eigen::Index>(track_boxes.size());
  const auto m = static_cast<Eigen::Index>(detection_boxes.size());
  CostMatrix c;
  c.weights = weights;
  c.iou.resize(n, m);
  c.distance.resize(n, m);
  c.fingerprint.resize(n, m);

  std::vector<Point2<double>> det_centers(m);
  for (Eigen::Index j = 0; j < m; ++j) det_centers[j] = detection_boxes[j].center();

  for (Eigen::Index i = 0; i < n; ++i) {
    const Box& tb = track_boxes[i];
    const Point2<double> tc = tb.center();
    const MaybeFingerprint& tf = track_fingerprints[i];
    for (Eigen::Index j = 0; j < m; ++j) {
      c.iou(i, j) = 1.0 - iou(tb, detection_boxes[j]);
      c.distance(i, j) = normalized_distance(tc, det_centers[j], geometry);
      const MaybeFingerprint& df = detection_fingerprints[j];
      if (tf && df) ++c.similarity_evaluations;
      c.fingerprint(i, j) = fingerprint_cost(tf, df);
    }
  }
  c.total = c.iou + weights.alpha * c.distance + weights.beta * c.fingerprint;
  return c;
}

Matching solve_assignment(const Eigen::MatrixXd& cost) {
  const Eigen::Index rows = cost.rows();
  const Eigen::Index cols = cost.cols();
  if (rows == 0 || cols == 0) return {};
  if (!cost.allFinite() || (cost.array() < 0.0).any()) {
    throw std::invalid_argument("assignment costs must be finite and non-negative");
  }

  const Eigen::Index n = std::max(rows, cols);
  Eigen::MatrixXd a;
  if (rows == cols) {
    a = cost;
  } else {
    a = Eigen::MatrixXd::Constant(n, n, 10.0 * (cost.maxCoeff() + 1.0));
    a.topLeftCorner(rows, cols) = cost;
  }

  // Shortest augmenting path with row/column potentials, 1-based with a
  // sentinel column 0. Columns are scanned in index order and only a strictly
  // smaller reduced cost replaces the incumbent, so ties go to the lowest index.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<Eigen::Index> owner(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (Eigen::Index i = 1; i <= n; ++i) {
    owner[0] = i;
    Eigen::Index j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const Eigen::Index i0 = owner[j0];
      double delta = kInf;
      Eigen::Index j1 = 0;
      for (Eigen::Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double reduced = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (reduced < minv[j]) {
          minv[j] = reduced;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Eigen::Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const Eigen::Index j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  Matching out;
  out.reserve(static_cast<std::size_t>(std::min(rows, cols)));
  for (Eigen::Index j = 1; j <= n; ++j) {
    const Eigen::Index i = owner[j] - 1;
    if (i < rows && j - 1 < cols) out.emplace_back(static_cast<int>(i), static_cast<int>(j - 1));
  }
  std::sort(out.begin(), out.end());
  return out;
}

double matching_cost(const Eigen::MatrixXd& cost, const Matching& matching) {
  double total = 0.0;
  for (const auto& [r, c] : matching) total += cost(r, c);
  return total;
}

AssociationResult gate(const Matching& matching, const Eigen::MatrixXd& cost, double threshold) {
  AssociationResult out;
  std::vector<char> track_used(static_cast<std::size_t>(cost.rows()), 0);
  std::vector<char> det_used(static_cast<std::size_t>(cost.cols()), 0);
  for (const auto& [t, d] : matching) {
    if (cost(t, d) > threshold) continue;
    out.pairs.emplace_back(t, d);
    track_used[t] = 1;
    det_used[d] = 1;
  }
  for (int t = 0; t < static_cast<int>(track_used.size()); ++t) {
    if (!track_used[t]) out.unassigned_tracks.push_back(t);
  }
  for (int d = 0; d < static_cast<int>(det_used.size()); ++d) {
    if (!det_used[d]) out.unassigned_detections.push_back(d);
  }
  return out;
}

}  // namespace survtrack
