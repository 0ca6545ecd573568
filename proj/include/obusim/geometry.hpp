#pragma once

#include <array>
#include <cmath>
#include <numbers>

#include <Eigen/Core>

#include "obusim/types.hpp"

namespace obusim {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

/// Planar position plus heading, in whichever frame the caller uses.
template <typename Scalar>
struct Pose2 {
  Vec2<Scalar> position = Vec2<Scalar>::Zero();
  Scalar heading = 0;
};

/// Where the ego camera sits in the world frame and which way it points.
template <typename Scalar>
struct CameraPose {
  Scalar x0 = 0;
  Scalar y0 = 0;
  Scalar beta0 = 0;

  static CameraPose of(const VehicleState& ego) {
    return {Scalar(ego.x), Scalar(ego.y), normalize_angle(Scalar(ego.heading))};
  }
};

/// Rectangle of a vehicle with its numberplate.
///
/// Corner order is A front-left, B front-right, C rear-right, D rear-left
/// with respect to `heading`. M and N are the plate endpoints on the rear
/// edge, G the rear-bumper centre and F the front-bumper centre.
template <typename Scalar>
struct BoundingBox {
  std::array<Vec2<Scalar>, 4> corners;
  Vec2<Scalar> m;
  Vec2<Scalar> n;
  Vec2<Scalar> g;
  Vec2<Scalar> f;
  Scalar heading = 0;

  Vec2<Scalar> center() const { return (g + f) / Scalar(2); }
};

/// Rebuilds the rectangle of `state` from its front-bumper centre, heading
/// and dimensions, with a plate of `plate_width` centred on the rear edge.
template <typename Scalar = double>
BoundingBox<Scalar> reconstruct_box(const VehicleState& state, Scalar plate_width) {
  const Vec2<Scalar> front(Scalar(state.x), Scalar(state.y));
  const Scalar h = Scalar(state.heading);
  const Vec2<Scalar> forward(std::cos(h), std::sin(h));
  const Vec2<Scalar> left(-forward.y(), forward.x());
  const Vec2<Scalar> half_w = left * (Scalar(state.width) / 2);
  const Vec2<Scalar> rear = front - forward * Scalar(state.length);
  const Vec2<Scalar> half_plate = left * (plate_width / 2);

  BoundingBox<Scalar> box;
  box.corners = {front + half_w, front - half_w, rear - half_w, rear + half_w};
  box.g = rear;
  box.f = front;
  box.m = rear + half_plate;
  box.n = rear - half_plate;
  box.heading = normalize_angle(h);
  return box;
}

/// The rotation part of the world-to-camera transform acting on
/// (x - x0, y - y0, beta - beta0).
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> camera_rotation(const CameraPose<Scalar>& cam) {
  const Scalar c = std::cos(cam.beta0), s = std::sin(cam.beta0);
  Eigen::Matrix<Scalar, 3, 3> r;
  r << c, s, 0,
      -s, c, 0,
       0, 0, 1;
  return r;
}

/// World frame to the camera frame (camera at the origin looking along +x).
/// The returned heading is renormalised to (-pi, pi].
template <typename Scalar>
Pose2<Scalar> to_camera_frame(const CameraPose<Scalar>& cam, const Pose2<Scalar>& p) {
  const Eigen::Matrix<Scalar, 3, 1> rel(p.position.x() - cam.x0, p.position.y() - cam.y0,
                                        p.heading - cam.beta0);
  const Eigen::Matrix<Scalar, 3, 1> out = camera_rotation(cam) * rel;
  return {out.template head<2>(), normalize_angle(out.z())};
}

/// Inverse of to_camera_frame.
template <typename Scalar>
Pose2<Scalar> from_camera_frame(const CameraPose<Scalar>& cam, const Pose2<Scalar>& p) {
  const Eigen::Matrix<Scalar, 3, 1> local(p.position.x(), p.position.y(), p.heading);
  const Eigen::Matrix<Scalar, 3, 1> rel = camera_rotation(cam).transpose() * local;
  return {Vec2<Scalar>(rel.x() + cam.x0, rel.y() + cam.y0), normalize_angle(rel.z() + cam.beta0)};
}

/// Applies the camera transform to every point of a world-frame box.
template <typename Scalar>
BoundingBox<Scalar> to_camera_frame(const CameraPose<Scalar>& cam, const BoundingBox<Scalar>& box) {
  const Eigen::Matrix<Scalar, 2, 2> rot = camera_rotation(cam).template topLeftCorner<2, 2>();
  const Vec2<Scalar> eye(cam.x0, cam.y0);
  auto map = [&](const Vec2<Scalar>& p) -> Vec2<Scalar> { return rot * (p - eye); };

  BoundingBox<Scalar> out;
  for (std::size_t i = 0; i < 4; ++i) out.corners[i] = map(box.corners[i]);
  out.m = map(box.m);
  out.n = map(box.n);
  out.g = map(box.g);
  out.f = map(box.f);
  out.heading = normalize_angle(box.heading - cam.beta0);
  return out;
}

/// Polar argument of `p` in [-pi, pi].
template <typename Scalar>
Scalar arg(const Vec2<Scalar>& p) {
  return std::atan2(p.y(), p.x());
}

/// True when `p` lies inside or on the boundary of the rectangle.
template <typename Scalar>
bool box_contains(const BoundingBox<Scalar>& box, const Vec2<Scalar>& p) {
  bool any_pos = false, any_neg = false;
  for (std::size_t i = 0; i < 4; ++i) {
    const Vec2<Scalar>& a = box.corners[i];
    const Vec2<Scalar>& b = box.corners[(i + 1) % 4];
    const Scalar cross = (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
    any_pos |= cross > 0;
    any_neg |= cross < 0;
  }
  return !(any_pos && any_neg);
}

}  // namespace obusim
