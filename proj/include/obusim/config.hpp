#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "obusim/perception.hpp"
#include "obusim/sandbox.hpp"
#include "obusim/trace.hpp"
#include "obusim/vehicle_types.hpp"

namespace obusim {

struct TypeWeight {
  std::string type;
  double weight = 1.0;
};

/// Parameters for a generated trace, used when no trace file is given.
struct SynthSpec {
  std::uint64_t seed = 1;
  std::size_t vehicles = 100;
  std::size_t ticks = 10;
  double area = 1000.0;
};

/// Half-open tick range [first, last).
using TickRange = std::pair<Tick, Tick>;

/// Parses "A:B". Throws ConfigError unless A < B.
TickRange parse_tick_range(const std::string& text);

struct ScenarioConfig {
  std::uint64_t seed = 1;
  std::optional<TickRange> ticks;
  std::filesystem::path trace;
  std::optional<TraceFormat> trace_format;
  std::optional<SynthSpec> synth;
  TraceDefaults vehicle_defaults;

  double cell_size = 300.0;
  double perception_radius = 100.0;
  double comm_range = 300.0;
  PerceptionConfig perception;

  std::vector<TypeWeight> mix{{"ConnectedVehicle", 1.0}};
  /// Trace vehicle name -> type, overriding the mix.
  std::map<std::string, std::string> assign;
  VehicleTypeRegistry types = VehicleTypeRegistry::builtin();

  std::filesystem::path out = "run";
  std::size_t workers = 1;

  /// Throws ConfigError.
  void validate() const;
};

/// INI-style scenario file; see the README for the keys. Relative paths are
/// resolved against `base_dir`. Throws ParseError/ConfigError/SchemaError.
ScenarioConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {},
                            const ModuleRegistry& modules = ModuleRegistry::with_builtins());
ScenarioConfig load_config(const std::filesystem::path& path,
                           const ModuleRegistry& modules = ModuleRegistry::with_builtins());

}  // namespace obusim
