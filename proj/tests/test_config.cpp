#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "obusim/config.hpp"
#include "obusim/errors.hpp"

using namespace obusim;

namespace {

ScenarioConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "/data");
}

}  // namespace

TEST(Config, Defaults) {
  const auto cfg = parse("");
  EXPECT_EQ(cfg.cell_size, 300.0);
  EXPECT_EQ(cfg.comm_range, 300.0);
  EXPECT_EQ(cfg.perception_radius, 100.0);
  ASSERT_EQ(cfg.mix.size(), 1u);
  EXPECT_EQ(cfg.mix[0].type, "ConnectedVehicle");
  EXPECT_FALSE(cfg.ticks);
  EXPECT_EQ(cfg.workers, 1u);
}

TEST(Config, FullFile) {
  const auto cfg = parse(R"(
; comment
[scenario]
seed = 9
ticks = 10:20
trace = traces/a.xml
trace_format = fcd
cell_size = 400
comm_range = 350
workers = 4
out = results

[perception]
fov_half_angle_deg = 30
max_range = 80
max_plate_angle_deg = 45
plate_width = 0.5

[mix]
ConnectedVehicle = 3
Slow = 1

[assign]
truck_7 = SilenceAttacker

[vehicle Slow]
connected = true
modules = perception, object_store
edge.perception = object_store
)");
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.ticks, (TickRange{10, 20}));
  EXPECT_EQ(cfg.trace, std::filesystem::path("/data/traces/a.xml"));
  EXPECT_EQ(cfg.trace_format, TraceFormat::Fcd);
  EXPECT_EQ(cfg.out, std::filesystem::path("results"));
  EXPECT_EQ(cfg.workers, 4u);
  EXPECT_NEAR(cfg.perception.fov_half_angle, std::numbers::pi / 6, 1e-15);
  EXPECT_NEAR(cfg.perception.max_plate_angle, std::numbers::pi / 4, 1e-15);
  EXPECT_EQ(cfg.perception.max_range, 80.0);
  ASSERT_EQ(cfg.mix.size(), 2u);
  EXPECT_EQ(cfg.mix[1].type, "Slow");
  EXPECT_EQ(cfg.mix[1].weight, 1.0);
  EXPECT_EQ(cfg.assign.at("truck_7"), "SilenceAttacker");
  EXPECT_TRUE(cfg.types.contains("Slow"));
}

TEST(Config, Synth) {
  const auto cfg = parse("[synth]\nvehicles = 50\nticks = 4\narea = 900\nseed = 3\n");
  ASSERT_TRUE(cfg.synth);
  EXPECT_EQ(cfg.synth->vehicles, 50u);
  EXPECT_EQ(cfg.synth->area, 900.0);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse("[scenario]\nticks = 5:5\n"), ConfigError);
  EXPECT_THROW(parse("[scenario]\nticks = 5\n"), ConfigError);
  EXPECT_THROW(parse("[scenario]\ncomm_range = 400\n"), ConfigError);
  EXPECT_THROW(parse("[scenario]\nperception_radius = 301\n"), ConfigError);
  EXPECT_THROW(parse("[scenario]\nseed = abc\n"), ConfigError);
  EXPECT_THROW(parse("[scenario]\nbogus = 1\n"), ConfigError);
  EXPECT_THROW(parse("[mix]\nConnectedVehicle = 0\n"), ConfigError);
  EXPECT_THROW(parse("[mix]\nConnectedVehicle = -1\n"), ConfigError);
  EXPECT_THROW(parse("[mix]\nConnectedVehicle = inf\n"), ConfigError);
  EXPECT_THROW(parse("[mix]\nGhost = 1\n"), ConfigError);
  EXPECT_THROW(parse("[assign]\ncar = Ghost\n"), ConfigError);
  EXPECT_THROW(parse("[weather]\nrain = 1\n"), ConfigError);
  EXPECT_THROW(parse("[scenario]\nworkers = 0\n"), ConfigError);
  EXPECT_THROW(parse("[perception]\nfov_half_angle_deg = 100\n"), ConfigError);
  EXPECT_THROW(parse("[scenario]\nseed = 1\nseed = 2\n"), ParseError);
  EXPECT_THROW(parse("[scenario\n"), ParseError);
}

TEST(Config, TickRange) {
  EXPECT_EQ(parse_tick_range("0:100"), (TickRange{0, 100}));
  EXPECT_EQ(parse_tick_range("-5:-1"), (TickRange{-5, -1}));
  EXPECT_THROW(parse_tick_range("3:2"), ConfigError);
  EXPECT_THROW(parse_tick_range("a:b"), ConfigError);
}
