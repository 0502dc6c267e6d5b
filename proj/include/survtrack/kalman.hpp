#pragma once

// Constant-velocity Kalman filter over (cx, cy, s, r) box state, where s is
// the box area and r = w / h. All four observed components carry their own
// per-frame velocity, giving an 8-dimensional state.

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "survtrack/geometry.hpp"

namespace survtrack {

class KalmanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Scalar>
struct KalmanLimits {
  static constexpr Scalar min_area = Scalar(1e-6);
  static constexpr Scalar min_aspect = Scalar(1e-3);
  static constexpr Scalar max_aspect = Scalar(1e3);
};

template <typename Scalar>
struct MotionState {
  using Vector = Eigen::Matrix<Scalar, 8, 1>;
  using Matrix = Eigen::Matrix<Scalar, 8, 8>;

  Vector mean = Vector::Zero();
  Matrix covariance = Matrix::Identity();

  Scalar area() const { return mean(2); }
  Scalar aspect() const { return mean(3); }
};

/// Noise model. Every standard deviation is a weight times a magnitude taken
/// from the current state: box height for cx/cy (and their velocities), the
/// area for s, the aspect ratio for r.
template <typename Scalar>
struct NoiseConfig {
  Eigen::Matrix<Scalar, 4, 1> measurement_weight{Scalar(1) / 20, Scalar(1) / 20,
                                                  Scalar(1) / 10, Scalar(1) / 20};
  Eigen::Matrix<Scalar, 8, 1> process_weight =
      (Eigen::Matrix<Scalar, 8, 1>() << Scalar(1) / 40, Scalar(1) / 40, Scalar(1) / 20,
       Scalar(1) / 40, Scalar(1) / 160, Scalar(1) / 160, Scalar(1) / 80, Scalar(1) / 160)
          .finished();
  Eigen::Matrix<Scalar, 8, 1> initial_weight =
      (Eigen::Matrix<Scalar, 8, 1>() << Scalar(1) / 10, Scalar(1) / 10, Scalar(1) / 5,
       Scalar(1) / 10, Scalar(1) / 16, Scalar(1) / 16, Scalar(1) / 8, Scalar(1) / 16)
          .finished();

  bool valid() const {
    return (measurement_weight.array() > Scalar(0)).all() &&
           (process_weight.array() > Scalar(0)).all() &&
           (initial_weight.array() > Scalar(0)).all() && measurement_weight.allFinite() &&
           process_weight.allFinite() && initial_weight.allFinite();
  }
};

namespace kalman_detail {

template <typename Scalar>
Eigen::Matrix<Scalar, 4, 1> magnitudes(Scalar area, Scalar aspect) {
  const Scalar s = std::max(area, KalmanLimits<Scalar>::min_area);
  const Scalar r = std::clamp(aspect, KalmanLimits<Scalar>::min_aspect, KalmanLimits<Scalar>::max_aspect);
  const Scalar height = std::max(std::sqrt(s / r), Scalar(1));
  return {height, height, std::max(s, Scalar(1)), r};
}

template <typename Scalar>
void clamp_shape(Eigen::Matrix<Scalar, 8, 1>& mean, Scalar min_area) {
  mean(2) = std::max(mean(2), min_area);
  mean(3) = std::clamp(mean(3), KalmanLimits<Scalar>::min_aspect, KalmanLimits<Scalar>::max_aspect);
}

template <typename Scalar>
void symmetrize(Eigen::Matrix<Scalar, 8, 8>& p) {
  p = (p + p.transpose()).eval() / Scalar(2);
}

}  // namespace kalman_detail

/// Constant-velocity transition with a one-frame step.
template <typename Scalar>
Eigen::Matrix<Scalar, 8, 8> transition_matrix() {
  Eigen::Matrix<Scalar, 8, 8> f = Eigen::Matrix<Scalar, 8, 8>::Identity();
  f.template topRightCorner<4, 4>().setIdentity();
  return f;
}

template <typename Scalar>
Eigen::Matrix<Scalar, 4, 8> observation_matrix() {
  Eigen::Matrix<Scalar, 4, 8> h = Eigen::Matrix<Scalar, 4, 8>::Zero();
  h.template leftCols<4>().setIdentity();
  return h;
}

template <typename Scalar>
Eigen::Matrix<Scalar, 8, 8> process_noise(const MotionState<Scalar>& st, const NoiseConfig<Scalar>& cfg) {
  const auto mag = kalman_detail::magnitudes(st.area(), st.aspect());
  Eigen::Matrix<Scalar, 8, 1> std_dev;
  std_dev << mag, mag;
  std_dev.array() *= cfg.process_weight.array();
  return std_dev.array().square().matrix().asDiagonal();
}

template <typename Scalar>
Eigen::Matrix<Scalar, 4, 4> measurement_noise(const MotionState<Scalar>& st, const NoiseConfig<Scalar>& cfg) {
  const Eigen::Matrix<Scalar, 4, 1> std_dev =
      kalman_detail::magnitudes(st.area(), st.aspect()).cwiseProduct(cfg.measurement_weight);
  return std_dev.array().square().matrix().asDiagonal();
}

/// (cx, cy, s, r) observation of a box.
template <typename Scalar>
Eigen::Matrix<Scalar, 4, 1> box_to_observation(const BoundingBox<Scalar>& b) {
  return {b.x + b.w / Scalar(2), b.y + b.h / Scalar(2), b.w * b.h, b.w / b.h};
}

template <typename Scalar>
MotionState<Scalar> init_state(const BoundingBox<Scalar>& box, const NoiseConfig<Scalar>& cfg) {
  if (box.degenerate() || !std::isfinite(box.x) || !std::isfinite(box.y) || !std::isfinite(box.w) ||
      !std::isfinite(box.h)) {
    throw std::invalid_argument("cannot initialize a track from a degenerate box");
  }
  MotionState<Scalar> st;
  st.mean.setZero();
  st.mean.template head<4>() = box_to_observation(box);
  const auto mag = kalman_detail::magnitudes(st.area(), st.aspect());
  Eigen::Matrix<Scalar, 8, 1> std_dev;
  std_dev << mag, mag;
  std_dev.array() *= cfg.initial_weight.array();
  st.covariance = std_dev.array().square().matrix().asDiagonal();
  return st;
}

/// Generic propagation step x' = F x, P' = F P F^T + Q.
template <typename Scalar>
MotionState<Scalar> propagate(const MotionState<Scalar>& st, const Eigen::Matrix<Scalar, 8, 8>& f,
                              const Eigen::Matrix<Scalar, 8, 8>& q) {
  MotionState<Scalar> out;
  out.mean.noalias() = f * st.mean;
  out.covariance.noalias() = f * st.covariance * f.transpose();
  out.covariance += q;
  kalman_detail::symmetrize(out.covariance);
  return out;
}

/// Generic correction against observation z with noise r. Throws KalmanError
/// when the innovation covariance is not positive definite.
template <typename Scalar>
MotionState<Scalar> correct(const MotionState<Scalar>& st, const Eigen::Matrix<Scalar, 4, 1>& z,
                            const Eigen::Matrix<Scalar, 4, 4>& r) {
  const Eigen::Matrix<Scalar, 4, 8> h = observation_matrix<Scalar>();
  const Eigen::Matrix<Scalar, 8, 4> pht = st.covariance * h.transpose();
  const Eigen::Matrix<Scalar, 4, 4> s = h * pht + r;
  const Eigen::LLT<Eigen::Matrix<Scalar, 4, 4>> llt(s);
  if (llt.info() != Eigen::Success || !s.allFinite()) {
    throw KalmanError("innovation covariance is not positive definite");
  }
  // K = P H^T S^-1, computed as (S^-1 H P)^T since S and P are symmetric.
  const Eigen::Matrix<Scalar, 8, 4> gain = llt.solve(pht.transpose()).transpose();
  MotionState<Scalar> out;
  out.mean = st.mean + gain * (z - h * st.mean);
  out.covariance = st.covariance - gain * h * st.covariance;
  kalman_detail::symmetrize(out.covariance);
  if (!out.mean.allFinite() || !out.covariance.allFinite()) {
    throw KalmanError("non-finite posterior");
  }
  return out;
}

template <typename Scalar>
MotionState<Scalar> predict(const MotionState<Scalar>& st, const NoiseConfig<Scalar>& cfg) {
  auto out = propagate(st, transition_matrix<Scalar>(), process_noise(st, cfg));
  out.mean(2) = std::max(out.mean(2), Scalar(0));
  out.mean(3) = std::clamp(out.mean(3), KalmanLimits<Scalar>::min_aspect, KalmanLimits<Scalar>::max_aspect);
  return out;
}

template <typename Scalar>
MotionState<Scalar> update(const MotionState<Scalar>& st, const BoundingBox<Scalar>& observed,
                           const NoiseConfig<Scalar>& cfg) {
  if (observed.degenerate()) throw std::invalid_argument("cannot update with a degenerate box");
  auto out = correct(st, box_to_observation(observed), measurement_noise(st, cfg));
  kalman_detail::clamp_shape(out.mean, KalmanLimits<Scalar>::min_area);
  return out;
}

template <typename Scalar>
BoundingBox<Scalar> state_to_box(const MotionState<Scalar>& st) {
  const Scalar s = std::max(st.mean(2), KalmanLimits<Scalar>::min_area);
  const Scalar r = std::clamp(st.mean(3), KalmanLimits<Scalar>::min_aspect, KalmanLimits<Scalar>::max_aspect);
  const Scalar w = std::sqrt(s * r);
  const Scalar h = std::sqrt(s / r);
  return {st.mean(0) - w / Scalar(2), st.mean(1) - h / Scalar(2), w, h};
}

}  // namespace survtrack
