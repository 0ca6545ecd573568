#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "obusim/errors.hpp"
#include "obusim/perception.hpp"
#include "support/oracles.hpp"

using namespace obusim;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<VehicleId> perceived_ids(const VehicleState& ego, const std::vector<VehicleState>& others,
                                     const PerceptionConfig& cfg = {}) {
  std::vector<VehicleId> out;
  for (const auto& o : perceive(ego, others, cfg)) out.push_back(o.plate);
  return out;
}

ProjectionView view(VehicleId id, double d1, double d2, double r1, double r2, double dist) {
  ProjectionView v;
  v.id = id;
  v.delta1 = d1;
  v.delta2 = d2;
  v.rho1 = r1;
  v.rho2 = r2;
  v.dist_g = dist;
  return v;
}

std::vector<VehicleId> ids(const std::vector<ProjectionView>& v) {
  std::vector<VehicleId> out;
  for (const auto& x : v) out.push_back(x.id);
  return out;
}

}  // namespace

TEST(Perception, VehicleAheadIsSeen) {
  const VehicleState ego{0, 0, 0, 0};
  const std::vector<VehicleState> others{{1, 20, 0, 0}};
  const auto seen = perceive(ego, others, {}, 7);
  ASSERT_EQ(seen.size(), 1u);
  EXPECT_EQ(seen[0], (PerceivedObject{1, 20, 0, 0, 7}));
}

TEST(Perception, VehicleBehindIsNotSeen) {
  const VehicleState ego{0, 0, 0, 0};
  EXPECT_TRUE(perceived_ids(ego, {{1, -20, 0, 0}}).empty());
}

TEST(Perception, NearerVehicleHidesPlateBehindIt) {
  const VehicleState ego{0, 0, 0, 0};
  const std::vector<VehicleState> lane{{1, 15, 0, 0}, {2, 30, 0, 0}};
  EXPECT_EQ(perceived_ids(ego, lane), std::vector<VehicleId>{1});
}

TEST(Perception, SideBySideBothSeen) {
  const VehicleState ego{0, 0, 0, 0};
  EXPECT_EQ(perceived_ids(ego, {{1, 20, 3.5, 0}, {2, 20, -3.5, 0}}), (std::vector<VehicleId>{1, 2}));
}

TEST(Perception, OncomingVehicleShowsFrontPlate) {
  const VehicleState ego{0, 0, 0, 0};
  // Front bumper at x = 20 facing the camera.
  EXPECT_EQ(perceived_ids(ego, {{1, 20, 0, kPi}}), std::vector<VehicleId>{1});
}

TEST(Perception, SidewaysPlateIsUnreadable) {
  const VehicleState ego{0, 0, 0, 0};
  EXPECT_TRUE(perceived_ids(ego, {{1, 20, 0, kPi / 2}}).empty());
  PerceptionConfig wide;
  wide.max_plate_angle = kPi / 2;
  EXPECT_EQ(perceived_ids(ego, {{1, 20, 0, kPi / 2}}, wide), std::vector<VehicleId>{1});
}

TEST(Perception, HiddenSidewaysVehicleStillOccludes) {
  // The truck is not reported, but its box still blocks the car behind.
  const VehicleState ego{0, 0, 0, 0};
  const std::vector<VehicleState> scene{{1, 12, 6, kPi / 2, 12, 2.5}, {2, 40, 0, 0}};
  EXPECT_TRUE(perceived_ids(ego, scene).empty());
}

TEST(Perception, RangeIsInclusiveOnCorners) {
  const VehicleState ego{0, 0, 0, 0};
  PerceptionConfig cfg;
  // Rear-right corner exactly at (30, 0); every other corner is further away.
  const VehicleState v{1, 35, 0.9, 0, 5, 1.8};
  cfg.max_range = 30;
  EXPECT_EQ(perceived_ids(ego, {v}, cfg), std::vector<VehicleId>{1});
  cfg.max_range = 29.999;
  EXPECT_TRUE(perceived_ids(ego, {v}, cfg).empty());
}

TEST(Perception, FovHalfAngleIsInclusive) {
  const VehicleState ego{0, 0, 0, 0};
  PerceptionConfig cfg;
  cfg.max_plate_angle = kPi;
  // Front-right corner exactly on the 45 degree ray, the rest outside.
  const VehicleState v{1, 20, 21, 0, 5, 2};
  EXPECT_EQ(perceived_ids(ego, {v}, cfg), std::vector<VehicleId>{1});
  const VehicleState w{1, 20, 21 + 1e-6, 0, 5, 2};
  EXPECT_TRUE(perceived_ids(ego, {w}, cfg).empty());
}

TEST(Perception, EgoIsIgnoredAndOverlapsAreSkipped) {
  const VehicleState ego{0, 0, 0, 0};
  const std::vector<VehicleState> scene{ego, {1, 2, 0, 0}, {2, 20, 5, 0}};
  EXPECT_EQ(perceived_ids(ego, scene), std::vector<VehicleId>{2});
}

TEST(Perception, NormalizeHeadingSwapsRoles) {
  const VehicleState v{0, 20, 0, kPi, 5, 2};
  const auto box = reconstruct_box(v, 0.5);
  const auto n = normalize_heading(box);
  EXPECT_NEAR(n.heading, 0.0, 1e-12);
  EXPECT_NEAR(n.g.x(), 20.0, 1e-12);
  EXPECT_NEAR(n.f.x(), 25.0, 1e-12);
  EXPECT_NEAR((n.m - n.g).norm(), 0.25, 1e-12);
  EXPECT_NEAR(n.m.y(), 0.25, 1e-12);  // M on the left of the new heading
  const VehicleState u{0, 20, 0, 0.3, 5, 2};
  EXPECT_EQ(normalize_heading(reconstruct_box(u, 0.5)).heading, reconstruct_box(u, 0.5).heading);
}

TEST(Perception, ProjectionAnglesSimple) {
  const VehicleState v{0, 25, 0, 0, 5, 2};
  const auto pv = projection_angles(reconstruct_box(v, 0.5), 3);
  EXPECT_EQ(pv.id, 3u);
  EXPECT_NEAR(pv.delta1, std::atan2(-1, 20), 1e-12);
  EXPECT_NEAR(pv.delta2, std::atan2(1, 20), 1e-12);
  EXPECT_NEAR(pv.rho1, std::atan2(-0.25, 20), 1e-12);
  EXPECT_NEAR(pv.dist_g, 20, 1e-12);
  EXPECT_FALSE(pv.box_wraps());
}

TEST(Perception, ProjectionAcrossTheSeam) {
  // A box straddling the -x axis behind the camera.
  const VehicleState v{0, -20, 2, kPi / 2, 4, 2};
  const auto pv = projection_angles(reconstruct_box(v, 0.5), 0);
  EXPECT_TRUE(pv.box_wraps());
  EXPECT_NEAR(pv.delta1, std::atan2(2, -19), 1e-12);
  EXPECT_NEAR(pv.delta2, std::atan2(-2, -19), 1e-12);
  const auto pieces = box_pieces(pv);
  ASSERT_EQ(pieces.size(), 2u);
  EXPECT_EQ(pieces[0].hi, kPi);
  EXPECT_EQ(pieces[1].lo, -kPi);
}

TEST(Perception, ProjectionRejectsBoxAroundCamera) {
  const VehicleState v{0, 2, 0, 0, 5, 2};
  EXPECT_THROW(projection_angles(reconstruct_box(v, 0.5)), DegenerateGeometry);
}

TEST(Perception, VisibleLinesRequireSortedInput) {
  const std::vector<ProjectionView> c{view(0, 0, 1, 0.2, 0.3, 5), view(1, 0, 1, 0.2, 0.3, 4)};
  EXPECT_THROW(get_visible_lines(c), ContractViolation);
  EXPECT_TRUE(get_visible_lines({}).empty());
}

TEST(Perception, TouchingIntervalsDoNotOcclude) {
  // The nearer box ends exactly where the open plate interval begins.
  const std::vector<ProjectionView> c{view(0, -0.5, 0.1, -0.1, 0.0, 1), view(1, 0.0, 0.6, 0.1, 0.3, 2)};
  EXPECT_EQ(ids(get_visible_lines(c)), (std::vector<VehicleId>{0, 1}));
  const std::vector<ProjectionView> d{view(0, -0.5, 0.1000001, -0.1, 0.0, 1),
                                      view(1, 0.0, 0.6, 0.1, 0.3, 2)};
  EXPECT_EQ(ids(get_visible_lines(d)), (std::vector<VehicleId>{0}));
}

TEST(Perception, FirstCandidateIsAlwaysVisible) {
  const std::vector<ProjectionView> c{view(4, -1, 1, 0.5, 0.6, 1)};
  EXPECT_EQ(ids(get_visible_lines(c)), std::vector<VehicleId>{4});
}

TEST(Perception, WrappedPlateMeetsBoxNearSeam) {
  // Plate across the seam: (3.0, pi] u [-pi, -3.0); nearer box [3.1, 3.12].
  const std::vector<ProjectionView> c{view(0, 3.1, 3.12, 3.105, 3.11, 1),
                                      view(1, 2.9, -2.9, 3.0, -3.0, 2)};
  EXPECT_EQ(ids(get_visible_lines(c)), std::vector<VehicleId>{0});
  EXPECT_EQ(ids(get_visible_lines(c)), oracle::naive_visible(c));
}

TEST(Perception, VisibleLinesMatchNaiveOnAdversarialIntervals) {
  // Endpoints from a small lattice so that shared endpoints, touching
  // intervals and empty plates occur often.
  std::mt19937_64 rng(77);
  std::vector<double> lattice;
  for (int i = -8; i <= 8; ++i) lattice.push_back(kPi * i / 8.0);
  std::uniform_int_distribution<std::size_t> pick(0, lattice.size() - 1);
  std::uniform_int_distribution<int> count(1, 25);
  for (int round = 0; round < 3000; ++round) {
    std::vector<ProjectionView> c;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      double a = lattice[pick(rng)], b = lattice[pick(rng)];
      double r1 = lattice[pick(rng)], r2 = lattice[pick(rng)];
      c.push_back(view(static_cast<VehicleId>(i), a, b, r1, r2, static_cast<double>(i)));
    }
    EXPECT_EQ(ids(get_visible_lines(c)), oracle::naive_visible(c)) << "round " << round;
  }
}

TEST(Perception, PipelineMatchesFirstPrinciplesOracle) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> count(1, 50);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  PerceptionConfig cfg;
  for (int scene = 0; scene < 500; ++scene) {
    const VehicleState ego{1000, 0, 0, ang(rng)};
    const auto others = oracle::random_vehicles(rng, count(rng), 0, 0, 70);
    EXPECT_EQ(perceived_ids(ego, others, cfg), oracle::naive_perceive(ego, others, cfg))
        << "scene " << scene;
  }
}

TEST(Perception, ResultsAreAlwaysVisibleUnderNaiveOracle) {
  std::mt19937_64 rng(31);
  PerceptionConfig cfg;
  for (int scene = 0; scene < 300; ++scene) {
    const VehicleState ego{1000, 0, 0, 0};
    const auto others = oracle::random_vehicles(rng, 40, 30, 0, 40);
    const auto views = oracle::scene_views(ego, others, cfg);
    EXPECT_EQ(ids(get_visible_lines(views)), oracle::naive_visible(views));
  }
}

TEST(CoverageTree, MatchesBitset) {
  std::mt19937_64 rng(8);
  for (int round = 0; round < 200; ++round) {
    const std::size_t n = 1 + rng() % 64;
    CoverageTree tree(n);
    std::vector<bool> bits(n, false);
    for (int op = 0; op < 40; ++op) {
      const std::size_t a = rng() % n, b = rng() % n;
      const auto lo = std::min(a, b), hi = std::max(a, b);
      if (rng() % 2) {
        tree.cover(lo, hi);
        for (auto i = lo; i <= hi; ++i) bits[i] = true;
      } else {
        bool expect = false;
        for (auto i = lo; i <= hi; ++i) expect |= bits[i];
        EXPECT_EQ(tree.any_covered(lo, hi), expect);
      }
    }
  }
  CoverageTree t(4);
  EXPECT_FALSE(t.any_covered(2, 1));
  t.cover(3, 2);
  EXPECT_FALSE(t.any_covered(0, 3));
}

TEST(PerceptionConfig, Validate) {
  PerceptionConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.fov_half_angle = 2.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.max_range = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}
