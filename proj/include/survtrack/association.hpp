#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "survtrack/fingerprint.hpp"
#include "survtrack/geometry.hpp"

namespace survtrack {

struct AssociationWeights {
  double alpha = 1.0;  ///< weight of the normalized center distance
  double beta = 1.0;   ///< weight of the fingerprint cost
  double gate = 1.5;   ///< pairs with combined cost strictly above are dropped

  bool valid() const;
};

/// Combined N x M cost (tracks x detections) with its three components kept
/// for diagnostics: total = iou + alpha * distance + beta * fingerprint.
struct CostMatrix {
  Eigen::MatrixXd total;
  Eigen::MatrixXd iou;
  Eigen::MatrixXd distance;
  Eigen::MatrixXd fingerprint;
  AssociationWeights weights;
  std::uint64_t similarity_evaluations = 0;

  Eigen::Index tracks() const { return total.rows(); }
  Eigen::Index detections() const { return total.cols(); }
};

CostMatrix build_cost_matrix(std::span<const Box> track_boxes, std::span<const MaybeFingerprint> track_fingerprints,
                             std::span<const Box> detection_boxes,
                             std::span<const MaybeFingerprint> detection_fingerprints,
                             const AssociationWeights& weights, const ImageGeometry<double>& geometry);

/// (row, column) pairs sorted by row.
using Matching = std::vector<std::pair<int, int>>;

/// Minimum-cost matching of size min(N, M) for a finite non-negative matrix.
/// Rectangular inputs are padded to square with 10 * (max entry + 1).
Matching solve_assignment(const Eigen::MatrixXd& cost);

/// Sum of the matched entries in row order.
double matching_cost(const Eigen::MatrixXd& cost, const Matching& matching);

struct AssociationResult {
  Matching pairs;
  std::vector<int> unassigned_tracks;
  std::vector<int> unassigned_detections;
};

/// Removes every pair whose cost is strictly above `threshold` and collects
/// the unmatched indices on both sides.
AssociationResult gate(const Matching& matching, const Eigen::MatrixXd& cost, double threshold);

inline AssociationResult associate(const CostMatrix& c) {
  return gate(solve_assignment(c.total), c.total, c.weights.gate);
}

}  // namespace survtrack
