#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "obusim/types.hpp"

namespace obusim {

using Bytes = std::vector<std::uint8_t>;

/// Collective perception message: the one data shape used on the air and
/// between in-vehicle modules. Extensions are private to the vehicle and
/// never reach the wire.
struct Cpm {
  StationId sender_station = 0;
  Tick gen_tick = 0;
  double sender_x = 0.0;
  double sender_y = 0.0;
  double sender_heading = 0.0;
  std::vector<PerceivedObject> objects;
  std::map<std::string, Bytes> extensions;

  friend bool operator==(const Cpm&, const Cpm&) = default;
};

using CpmPtr = std::shared_ptr<const Cpm>;

/// Little-endian wire layout:
///   u32 sender_station, u32 gen_tick, f64 x, f64 y, f64 heading,
///   u16 object count, then per object
///   u32 plate, f64 x, f64 y, f64 heading, u32 observed_tick.
inline constexpr std::size_t kCpmHeaderBytes = 4 + 4 + 3 * 8 + 2;
inline constexpr std::size_t kCpmObjectBytes = 4 + 2 * 8 + 8 + 4;

constexpr std::size_t wire_size(std::size_t object_count) noexcept {
  return kCpmHeaderBytes + object_count * kCpmObjectBytes;
}

/// Throws ValidationError when a field does not fit its wire type.
Bytes serialize(const Cpm& cpm);
/// Throws ParseError on truncated or oversized input.
Cpm deserialize(std::span<const std::uint8_t> bytes);

/// Copy of `cpm` without private extensions.
Cpm strip_extensions(Cpm cpm);

}  // namespace obusim
