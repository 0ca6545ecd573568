#include <random>

#include <gtest/gtest.h>

#include "obusim/errors.hpp"
#include "obusim/grid_index.hpp"
#include "support/oracles.hpp"

using namespace obusim;

namespace {

std::vector<VehicleId> ids(const std::vector<VehicleState>& v) {
  std::vector<VehicleId> out;
  for (const auto& s : v) out.push_back(s.id);
  return out;
}

}  // namespace

TEST(GridIndex, MatchesFullScanOnRandomLayouts) {
  std::mt19937_64 rng(42);
  for (int round = 0; round < 40; ++round) {
    std::uniform_real_distribution<double> centre(-3000.0, 3000.0), cell(20.0, 400.0);
    std::uniform_int_distribution<std::size_t> count(1, 600);
    const double cs = cell(rng);
    const auto states = oracle::random_vehicles(rng, count(rng), centre(rng), centre(rng), 800.0);
    const auto grid = GridIndex::rebuild(states, cs);
    std::uniform_int_distribution<std::size_t> pick(0, states.size() - 1);
    std::uniform_real_distribution<double> radius(0.0, cs);
    for (int q = 0; q < 20; ++q) {
      const auto ego = states[pick(rng)].id;
      const double r = radius(rng);
      EXPECT_EQ(ids(grid.get_nearby_vehicles(ego, r)), oracle::scan_nearby(states, ego, r));
    }
  }
}

TEST(GridIndex, BoundaryIsInclusive) {
  std::vector<VehicleState> s(3);
  s[0] = {0, 0.0, 0.0};
  s[1] = {1, 100.0, 0.0};
  s[2] = {2, 0.0, -100.0000001};
  const auto grid = GridIndex::rebuild(s, 100.0);
  EXPECT_EQ(ids(grid.get_nearby_vehicles(0, 100.0)), std::vector<VehicleId>{1});
}

TEST(GridIndex, NegativeCoordinatesAndCellEdges) {
  std::vector<VehicleState> s;
  VehicleId id = 0;
  for (double x : {-250.0, -200.0, -199.999, 0.0, 199.999, 200.0})
    for (double y : {-200.0, 0.0, 200.0}) s.push_back({id++, x, y});
  const auto grid = GridIndex::rebuild(s, 200.0);
  for (const auto& e : s) EXPECT_EQ(ids(grid.get_nearby_vehicles(e.id, 200.0)), oracle::scan_nearby(s, e.id, 200.0));
}

TEST(GridIndex, AtMostNineCandidateCells) {
  std::mt19937_64 rng(5);
  const auto states = oracle::random_vehicles(rng, 300, 0, 0, 1000);
  const auto grid = GridIndex::rebuild(states, 150.0);
  for (const auto& s : states) EXPECT_LE(grid.candidate_cells(s.x, s.y).size(), 9u);
}

TEST(GridIndex, EveryVehicleLandsInExactlyOneCell) {
  std::mt19937_64 rng(9);
  const auto states = oracle::random_vehicles(rng, 500, 10, -10, 900);
  const auto grid = GridIndex::rebuild(states, 75.0);
  std::size_t total = 0;
  for (std::int64_t y = 0; y < grid.rows(); ++y)
    for (std::int64_t x = 0; x < grid.columns(); ++x) total += grid.cell({x, y}).size();
  EXPECT_EQ(total, states.size());
  for (const auto& s : states) {
    const auto c = grid.cell_of(s.x, s.y);
    bool found = false;
    for (const auto& t : grid.cell(c)) found |= t.id == s.id;
    EXPECT_TRUE(found);
  }
}

TEST(GridIndex, Errors) {
  std::vector<VehicleState> s{{0, 0, 0}, {1, 5, 5}};
  const auto grid = GridIndex::rebuild(s, 50.0);
  EXPECT_THROW(grid.get_nearby_vehicles(0, 50.5), ConfigError);
  EXPECT_THROW(grid.get_nearby_vehicles(0, -1.0), ConfigError);
  EXPECT_THROW(grid.get_nearby_vehicles(7, 10.0), NotFoundError);
  EXPECT_THROW(GridIndex::rebuild(s, 0.0), ConfigError);
  std::vector<VehicleState> dup{{3, 0, 0}, {3, 1, 1}};
  EXPECT_THROW(GridIndex::rebuild(dup, 10.0), ValidationError);
  std::vector<VehicleState> huge{{0, 0, 0}, {1, 1e9, 1e9}};
  EXPECT_THROW(GridIndex::rebuild(huge, 1.0), ConfigError);
}

TEST(GridIndex, EmptyAndSingleton) {
  const auto empty = GridIndex::rebuild({}, 100.0);
  EXPECT_EQ(empty.size(), 0u);
  std::vector<VehicleState> one{{4, 12, 13}};
  const auto grid = GridIndex::rebuild(one, 100.0);
  EXPECT_TRUE(grid.get_nearby_vehicles(4, 100.0).empty());
}
