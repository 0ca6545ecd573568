#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace obusim {

/// Dense key of a vehicle inside one trace; doubles as its numberplate ID.
using VehicleId = std::uint32_t;
/// V2X station identifier, assigned at spawn to connected vehicles only.
using StationId = std::uint32_t;
using PlateId = std::uint32_t;
using Tick = std::int64_t;

/// Wraps an angle into (-pi, pi].
template <typename Scalar>
Scalar normalize_angle(Scalar a) {
  constexpr Scalar kPi = std::numbers::pi_v<Scalar>;
  constexpr Scalar kTwoPi = 2 * kPi;
  if (a > -kPi && a <= kPi) return a;
  a = std::fmod(a, kTwoPi);
  if (a > kPi) a -= kTwoPi;
  if (a <= -kPi) a += kTwoPi;
  return a;
}

/// Ground-truth pose of one vehicle at one tick. (x, y) is the centre of the
/// front bumper; heading is radians counterclockwise from +x.
struct VehicleState {
  VehicleId id = 0;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double length = 5.0;
  double width = 1.8;

  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

/// One object as reported by a camera or carried in a CPM.
struct PerceivedObject {
  PlateId plate = 0;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  Tick observed_tick = 0;

  friend bool operator==(const PerceivedObject&, const PerceivedObject&) = default;
};

}  // namespace obusim
