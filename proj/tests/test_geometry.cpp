#include <random>

#include <gtest/gtest.h>

#include "obusim/geometry.hpp"
#include "support/oracles.hpp"

using namespace obusim;

TEST(Geometry, CameraTransformMatchesHandFormula) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> pos(-500, 500), ang(-4, 4);
  for (int i = 0; i < 2000; ++i) {
    const CameraPose<double> cam{pos(rng), pos(rng), normalize_angle(ang(rng))};
    const Pose2<double> p{Vec2<double>(pos(rng), pos(rng)), normalize_angle(ang(rng))};
    const auto out = to_camera_frame(cam, p);
    const auto ref = oracle::to_camera(cam.x0, cam.y0, cam.beta0, {p.position.x(), p.position.y()});
    EXPECT_NEAR(out.position.x(), ref.x, 1e-9);
    EXPECT_NEAR(out.position.y(), ref.y, 1e-9);
    EXPECT_NEAR(std::remainder(out.heading - (p.heading - cam.beta0), 2 * oracle::kPi), 0.0, 1e-12);
  }
}

TEST(Geometry, HandComputedCameraPoint) {
  // Camera at (1, 1) facing +y: a point 10 m north is dead ahead, one 10 m
  // east is on the right (negative y in the camera frame).
  const CameraPose<double> cam{1, 1, oracle::kPi / 2};
  const auto ahead = to_camera_frame(cam, Pose2<double>{Vec2<double>(1, 11), 0});
  EXPECT_NEAR(ahead.position.x(), 10, 1e-12);
  EXPECT_NEAR(ahead.position.y(), 0, 1e-12);
  EXPECT_NEAR(ahead.heading, -oracle::kPi / 2, 1e-12);
  const auto right = to_camera_frame(cam, Pose2<double>{Vec2<double>(11, 1), 0});
  EXPECT_NEAR(right.position.x(), 0, 1e-12);
  EXPECT_NEAR(right.position.y(), -10, 1e-12);
}

TEST(Geometry, BoxMatchesHandOracle) {
  std::mt19937_64 rng(2);
  const auto vs = oracle::random_vehicles(rng, 500, 0, 0, 300);
  for (const auto& v : vs) {
    const auto box = reconstruct_box(v, 0.52);
    const auto ref = oracle::shape_of(v);
    for (int k = 0; k < 4; ++k) {
      EXPECT_NEAR(box.corners[k].x(), ref.corners[k].x, 1e-9);
      EXPECT_NEAR(box.corners[k].y(), ref.corners[k].y, 1e-9);
    }
    EXPECT_NEAR(box.g.x(), ref.rear.x, 1e-9);
    EXPECT_NEAR((box.m - box.n).norm(), 0.52, 1e-9);
    EXPECT_NEAR(((box.m + box.n) / 2 - box.g).norm(), 0.0, 1e-9);
    EXPECT_NEAR((box.corners[0] - box.corners[1]).norm(), v.width, 1e-9);
    EXPECT_NEAR((box.corners[1] - box.corners[2]).norm(), v.length, 1e-9);
  }
}

TEST(Geometry, ScalarTemplateWorksForFloat) {
  const VehicleState v{0, 3, 4, 0.3, 5, 2};
  const auto bf = reconstruct_box<float>(v, 0.5f);
  const auto bd = reconstruct_box<double>(v, 0.5);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(bf.corners[k].x(), bd.corners[k].x(), 1e-5);
}

TEST(Geometry, BoxContains) {
  const VehicleState v{0, 5, 0, 0, 5, 2};
  const auto box = reconstruct_box(v, 0.5);
  EXPECT_TRUE(box_contains(box, Vec2<double>(2.5, 0)));
  EXPECT_TRUE(box_contains(box, Vec2<double>(0, 1)));  // corner
  EXPECT_FALSE(box_contains(box, Vec2<double>(-0.01, 0)));
  EXPECT_FALSE(box_contains(box, Vec2<double>(2.5, 1.01)));
}

TEST(Geometry, NormalizeAngleRange) {
  for (double a = -20; a <= 20; a += 0.01) {
    const double n = normalize_angle(a);
    EXPECT_GT(n, -oracle::kPi);
    EXPECT_LE(n, oracle::kPi);
    EXPECT_NEAR(std::remainder(n - a, 2 * oracle::kPi), 0.0, 1e-9);
  }
  EXPECT_EQ(normalize_angle(-oracle::kPi), oracle::kPi);
}
