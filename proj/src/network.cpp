#include "obusim/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "obusim/errors.hpp"

namespace obusim {

Network::Network(double comm_range) : comm_range_(comm_range) {
  if (!(comm_range > 0.0) || !std::isfinite(comm_range)) {
    throw ConfigError("comm_range must be positive");
  }
}

void Network::begin_tick(Tick tick, const GridIndex& grid, const MatchTable& match) {
  if (comm_range_ > grid.cell_size()) {
    throw ConfigError("comm_range " + std::to_string(comm_range_) + " exceeds cell_size " +
                      std::to_string(grid.cell_size()));
  }
  tick_ = tick;
  grid_ = &grid;
  match_ = &match;
}

std::size_t Network::shb_broadcast(StationId sender, const Cpm& cpm) {
  return submit(sender, serialize(cpm));
}

std::size_t Network::submit(StationId sender, Bytes payload) {
  if (grid_ == nullptr || match_ == nullptr) {
    throw ContractViolation("Network::begin_tick must precede broadcasts");
  }
  const PlateId plate = match_->plate_of(sender);
  const auto& pos = grid_->at(plate);

  PendingDelivery d;
  d.origin = sender;
  d.origin_x = pos.x;
  d.origin_y = pos.y;
  d.send_tick = tick_;
  grid_->for_each_within(pos.x, pos.y, comm_range_, plate, [&](const VehicleState& s) {
    if (!match_->has_plate(s.id)) return;
    if (auto station = match_->station_of(s.id)) d.recipients.push_back(*station);
  });
  std::sort(d.recipients.begin(), d.recipients.end());

  const std::size_t n = payload.size();
  d.payload = std::move(payload);
  pending_.push_back(std::move(d));
  bytes_[sender] += n;
  total_bytes_ += n;
  return n;
}

Inboxes Network::step(Tick tick) {
  std::stable_sort(pending_.begin(), pending_.end(),
                   [](const PendingDelivery& a, const PendingDelivery& b) { return a.origin < b.origin; });
  Inboxes inboxes;
  for (const auto& d : pending_) {
    if (d.send_tick + 1 != tick) continue;
    auto cpm = std::make_shared<const Cpm>(deserialize(d.payload));
    for (StationId r : d.recipients) inboxes[r].push_back(cpm);
  }
  pending_.erase(std::remove_if(pending_.begin(), pending_.end(),
                                [&](const PendingDelivery& d) { return d.send_tick < tick; }),
                 pending_.end());
  return inboxes;
}

std::uint64_t Network::bytes_sent(StationId station) const {
  auto it = bytes_.find(station);
  return it == bytes_.end() ? 0 : it->second;
}

}  // namespace obusim
