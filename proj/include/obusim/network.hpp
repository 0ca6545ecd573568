#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "obusim/cpm.hpp"
#include "obusim/grid_index.hpp"
#include "obusim/match_table.hpp"

namespace obusim {

/// A broadcast waiting for the next tick.
struct PendingDelivery {
  Bytes payload;
  StationId origin = 0;
  double origin_x = 0.0;
  double origin_y = 0.0;
  Tick send_tick = 0;
  /// Stations in range at send time, ascending.
  std::vector<StationId> recipients;
};

using Inboxes = std::unordered_map<StationId, std::vector<CpmPtr>>;

/// Lossless unit-disk single-hop broadcast with exactly one tick of latency.
///
/// Per tick: `begin_tick` with that tick's grid and match table, then any
/// number of broadcasts, then `step(tick + 1)` hands out the inboxes. Not
/// thread-safe; concurrent agents buffer their payloads and the caller
/// submits them in a fixed order.
class Network {
 public:
  /// Throws ConfigError unless 0 < comm_range.
  explicit Network(double comm_range);

  double comm_range() const noexcept { return comm_range_; }

  /// Positions used to resolve recipients until the next call. Both
  /// references must stay valid until then.
  void begin_tick(Tick tick, const GridIndex& grid, const MatchTable& match);

  /// Strips extensions, serialises and enqueues. Returns the payload size.
  /// Throws NotFoundError for a sender that is not a live station.
  std::size_t shb_broadcast(StationId sender, const Cpm& cpm);
  /// Same as shb_broadcast for an already serialised payload.
  std::size_t submit(StationId sender, Bytes payload);

  /// Inboxes for `tick`: every payload sent at tick - 1, decoded once and
  /// shared, ordered by sender station then send order. Older leftovers are
  /// dropped.
  Inboxes step(Tick tick);

  std::size_t pending() const noexcept { return pending_.size(); }
  std::uint64_t bytes_sent(StationId station) const;
  std::uint64_t total_bytes() const noexcept { return total_bytes_; }

 private:
  double comm_range_;
  Tick tick_ = 0;
  const GridIndex* grid_ = nullptr;
  const MatchTable* match_ = nullptr;
  std::vector<PendingDelivery> pending_;
  std::unordered_map<StationId, std::uint64_t> bytes_;
  std::uint64_t total_bytes_ = 0;
};

}  // namespace obusim
