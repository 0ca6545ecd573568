#include "obusim/match_table.hpp"

#include <string>

#include "obusim/errors.hpp"

namespace obusim {

std::optional<StationId> MatchTable::add(PlateId plate, bool connected) {
  if (stations_.contains(plate)) {
    throw ValidationError("plate " + std::to_string(plate) + " is already registered");
  }
  std::optional<StationId> station;
  if (connected) {
    station = next_++;
    plates_.emplace(*station, plate);
  }
  stations_.emplace(plate, station);
  return station;
}

void MatchTable::remove(PlateId plate) {
  auto it = stations_.find(plate);
  if (it == stations_.end()) return;
  if (it->second) plates_.erase(*it->second);
  stations_.erase(it);
}

std::optional<StationId> MatchTable::station_of(PlateId plate) const {
  auto it = stations_.find(plate);
  if (it == stations_.end()) throw NotFoundError("unknown plate " + std::to_string(plate));
  return it->second;
}

PlateId MatchTable::plate_of(StationId station) const {
  auto it = plates_.find(station);
  if (it == plates_.end()) throw NotFoundError("unknown station " + std::to_string(station));
  return it->second;
}

}  // namespace obusim
