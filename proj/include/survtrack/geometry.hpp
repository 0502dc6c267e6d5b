#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

namespace survtrack {

/// Axis-aligned pixel rectangle in top-left / width / height convention.
/// Real-valued so that predicted boxes keep their sub-pixel position.
template <typename Scalar>
struct BoundingBox {
  Scalar x{0};
  Scalar y{0};
  Scalar w{0};
  Scalar h{0};

  Scalar area() const { return std::max(w, Scalar(0)) * std::max(h, Scalar(0)); }
  Scalar right() const { return x + w; }
  Scalar bottom() const { return y + h; }
  bool valid() const { return w >= Scalar(0) && h >= Scalar(0); }
  bool degenerate() const { return !(w > Scalar(0) && h > Scalar(0)); }

  Eigen::Matrix<Scalar, 2, 1> center() const {
    return {x + w / Scalar(2), y + h / Scalar(2)};
  }

  BoundingBox translated(Scalar dx, Scalar dy) const { return {x + dx, y + dy, w, h}; }

  template <typename Other>
  BoundingBox<Other> cast() const {
    return {Other(x), Other(y), Other(w), Other(h)};
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

using Box = BoundingBox<double>;

template <typename Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;

template <typename Scalar>
struct ImageGeometry {
  Scalar width{1920};
  Scalar height{1080};

  Scalar diagonal() const { return std::hypot(width, height); }
  bool valid() const { return width > Scalar(0) && height > Scalar(0); }
};

template <typename Scalar>
Point2<Scalar> center(const BoundingBox<Scalar>& b) {
  return b.center();
}

/// Intersection of two boxes; empty intersections come back with zero extent.
template <typename Scalar>
BoundingBox<Scalar> intersection(const BoundingBox<Scalar>& a, const BoundingBox<Scalar>& b) {
  const Scalar left = std::max(a.x, b.x);
  const Scalar top = std::max(a.y, b.y);
  const Scalar right = std::min(a.right(), b.right());
  const Scalar bottom = std::min(a.bottom(), b.bottom());
  return {left, top, std::max(Scalar(0), right - left), std::max(Scalar(0), bottom - top)};
}

/// Intersection over union in [0, 1]. Two zero-area boxes give 0, never NaN.
template <typename Scalar>
Scalar iou(const BoundingBox<Scalar>& a, const BoundingBox<Scalar>& b) {
  // areas from corner differences, like the intersection, so iou(a, a) == 1 exactly
  const auto extent_area = [](const BoundingBox<Scalar>& r) {
    return std::max(r.right() - r.x, Scalar(0)) * std::max(r.bottom() - r.y, Scalar(0));
  };
  const Scalar inter = intersection(a, b).area();
  const Scalar uni = extent_area(a) + extent_area(b) - inter;
  if (!(uni > Scalar(0))) return Scalar(0);
  return std::clamp(inter / uni, Scalar(0), Scalar(1));
}

/// Euclidean distance between two points divided by the image diagonal,
/// clamped to [0, 1] because extrapolated boxes may leave the image.
template <typename Scalar>
Scalar normalized_distance(const Point2<Scalar>& p, const Point2<Scalar>& q,
                           const ImageGeometry<Scalar>& g) {
  return std::clamp((p - q).norm() / g.diagonal(), Scalar(0), Scalar(1));
}

}  // namespace survtrack
