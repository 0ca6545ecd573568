#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "obusim/config.hpp"
#include "obusim/grid_index.hpp"
#include "obusim/match_table.hpp"
#include "obusim/metrics.hpp"
#include "obusim/network.hpp"
#include "obusim/sandbox.hpp"
#include "obusim/trace.hpp"

namespace obusim {

/// Wall-clock seconds spent in each phase of one tick.
struct PhaseTimings {
  Tick tick = 0;
  double position = 0.0;
  double perception = 0.0;
  double agents = 0.0;
  double network = 0.0;
  double metrics = 0.0;
  double wall = 0.0;
};

/// Type for a vehicle: the explicit assignment if any, otherwise a draw from
/// the weighted mix keyed by (seed, name), so it does not depend on spawn
/// order or worker count.
std::string assign_type(std::uint64_t seed, std::string_view name, std::span<const TypeWeight> mix);

/// Static index-partitioned parallel loop. With one worker it runs inline.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t workers);
  std::size_t workers() const noexcept { return workers_; }
  /// Calls fn(i) for every i in [0, count); rethrows the first exception.
  void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) const;

 private:
  std::size_t workers_;
};

/// The tick loop. Each step spawns and despawns vehicles from the trace,
/// rebuilds the grid, delivers last tick's broadcasts, runs perception and the
/// vehicles' module graphs, then enqueues the new broadcasts.
class Simulation {
 public:
  /// Copies `cfg`; `trace` must outlive the simulation.
  Simulation(const ScenarioConfig& cfg, const Trace& trace,
             ModuleRegistry modules = ModuleRegistry::with_builtins());

  /// Half-open range of ticks the simulation walks.
  Tick first_tick() const noexcept { return first_; }
  Tick end_tick() const noexcept { return end_; }
  Tick next_tick() const noexcept { return next_; }
  bool done() const noexcept { return next_ >= end_; }

  /// Runs `next_tick()` and returns the records of the live vehicles, by key.
  /// Throws ContractViolation when done().
  std::span<const MetricsRecord> step();

  const PhaseTimings& last_timings() const noexcept { return timings_; }
  const Network& network() const noexcept { return network_; }
  const MatchTable& match_table() const noexcept { return match_; }
  const GridIndex& grid() const noexcept { return grid_; }
  /// nullptr when the vehicle is not alive.
  const Vehicle* vehicle(VehicleId id) const;
  std::size_t live_vehicles() const noexcept { return vehicles_.size(); }
  /// Vehicle ticks aborted by a failing module so far.
  std::uint64_t failed_ticks() const noexcept { return failed_; }
  /// Distinct vehicles spawned so far.
  std::size_t vehicles_seen() const noexcept { return seen_.size(); }

 private:
  void spawn_and_despawn(std::span<const VehicleState> states);

  ScenarioConfig cfg_;
  const Trace& trace_;
  ModuleRegistry modules_;
  WorkerPool pool_;
  Tick first_ = 0;
  Tick end_ = 0;
  Tick next_ = 0;
  std::size_t cursor_ = 0;

  MatchTable match_;
  GridIndex grid_;
  Network network_;
  std::vector<Vehicle> vehicles_;
  std::vector<MetricsRecord> records_;
  PhaseTimings timings_;
  std::uint64_t failed_ = 0;
  std::unordered_set<VehicleId> seen_;
};

struct RunSummary {
  Tick first_tick = 0;
  Tick end_tick = 0;
  std::uint64_t total_bytes = 0;
  std::uint64_t failed_ticks = 0;
  std::size_t vehicles_seen = 0;
  std::vector<PhaseTimings> timings;

  double mean_wall() const;
};

inline constexpr std::string_view kTimingsFile = "timings.csv";

/// The configured trace file or, for a [synth] section, generated traffic.
Trace scenario_trace(const ScenarioConfig& cfg);

/// Runs the whole range, writing metrics.jsonl, metrics.idx and timings.csv
/// into `out`.
RunSummary run_scenario(const ScenarioConfig& cfg, const Trace& trace,
                        const std::filesystem::path& out,
                        ModuleRegistry modules = ModuleRegistry::with_builtins());

struct ReportOptions {
  std::optional<Tick> tick;
  double cell = 500.0;
};

/// Writes a CSV report of kind bandwidth, ttv, cpr or timing for the run in
/// `run_dir`. Throws ConfigError for unknown kinds.
void write_report(const std::filesystem::path& run_dir, std::string_view kind,
                  const ReportOptions& options, std::ostream& out);

}  // namespace obusim
