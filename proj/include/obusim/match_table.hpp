#pragma once

#include <optional>
#include <unordered_map>

#include "obusim/types.hpp"

namespace obusim {

/// Ground-truth numberplate <-> station mapping over the live vehicle set.
/// Stations are dense integers handed out at spawn and never reused.
class MatchTable {
 public:
  /// Adds a live vehicle. Connected vehicles get the next station ID.
  std::optional<StationId> add(PlateId plate, bool connected);
  /// Removes a despawned vehicle; unknown plates are ignored.
  void remove(PlateId plate);

  /// Station of the vehicle carrying `plate`, nullopt for unconnected ones.
  /// Throws NotFoundError for plates not alive.
  std::optional<StationId> station_of(PlateId plate) const;
  /// Throws NotFoundError for stations not alive.
  PlateId plate_of(StationId station) const;

  bool has_station(StationId station) const { return plates_.contains(station); }
  bool has_plate(PlateId plate) const { return stations_.contains(plate); }
  /// Number of connected vehicles alive.
  std::size_t size() const noexcept { return plates_.size(); }
  StationId next_station() const noexcept { return next_; }

 private:
  std::unordered_map<PlateId, std::optional<StationId>> stations_;
  std::unordered_map<StationId, PlateId> plates_;
  StationId next_ = 0;
};

}  // namespace obusim
