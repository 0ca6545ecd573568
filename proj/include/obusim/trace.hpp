#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "obusim/types.hpp"

namespace obusim {

/// All vehicle states of one simulation second, sorted by vehicle key.
struct TraceTick {
  Tick tick = 0;
  std::vector<VehicleState> states;

  friend bool operator==(const TraceTick&, const TraceTick&) = default;
};

/// A parsed mobility trace. Vehicle IDs from the source are interned into
/// dense keys in order of first appearance; `names[id]` recovers the original.
struct Trace {
  std::vector<std::string> names;
  std::vector<TraceTick> ticks;

  const std::string& name_of(VehicleId id) const { return names.at(id); }
  std::size_t vehicle_count() const { return names.size(); }

  friend bool operator==(const Trace&, const Trace&) = default;
};

/// Dimensions used when the source omits them.
struct TraceDefaults {
  double length = 5.0;
  double width = 1.8;
};

enum class TraceFormat { Csv, Fcd };

/// SUMO-style floating-car-data XML. Angles are degrees clockwise from north
/// and are converted to radians counterclockwise from +x.
Trace parse_fcd(std::istream& in, const TraceDefaults& defaults = {});

/// CSV with header `tick,id,x,y,heading,length,width` (any column order).
/// Empty length/width cells fall back to `defaults`.
Trace parse_csv(std::istream& in, const TraceDefaults& defaults = {});

void write_csv(const Trace& trace, std::ostream& out);

/// Picks the parser from `format`, or from the file extension when unset.
Trace load_trace(const std::filesystem::path& path, const TraceDefaults& defaults = {});
Trace load_trace(const std::filesystem::path& path, TraceFormat format,
                 const TraceDefaults& defaults = {});

/// Deterministic straight-lane traffic on a square of side `area` metres.
/// Lanes run along both axes every 100 m, vehicles keep constant speed and
/// wrap around the square edges.
Trace synth_traffic(std::uint64_t seed, std::size_t n_vehicles, std::size_t n_ticks, double area);

/// Shortest round-trip decimal form of `v`.
std::string format_double(double v);

}  // namespace obusim
