#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "obusim/cpm.hpp"
#include "obusim/match_table.hpp"
#include "obusim/metrics.hpp"
#include "obusim/rng.hpp"
#include "obusim/types.hpp"

namespace obusim {

/// Per-module key/value parameters from the vehicle-type definition.
class ModuleParams {
 public:
  ModuleParams() = default;
  explicit ModuleParams(std::map<std::string, std::string> values) : values_(std::move(values)) {}

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  bool has(const std::string& key) const { return values_.contains(key); }
  /// Throws ConfigError when present but not a non-negative integer.
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  friend bool operator==(const ModuleParams&, const ModuleParams&) = default;

 private:
  std::map<std::string, std::string> values_;
};

/// Adjacency-list DAG of module names. Entry modules additionally receive
/// the vehicle's network inbox.
struct FlowGraph {
  std::vector<std::string> nodes;
  std::vector<std::pair<std::string, std::vector<std::string>>> edges;
  std::vector<std::string> entry;

  friend bool operator==(const FlowGraph&, const FlowGraph&) = default;
};

class ModuleRegistry;
struct TickResult;

/// Topological order, ties broken by declaration order. Throws ValidationError
/// naming one edge of a cycle, SchemaError for undeclared endpoints or (with a
/// registry) unregistered module kinds.
std::vector<std::string> validate_flow(const FlowGraph& graph,
                                       const ModuleRegistry* registry = nullptr);

struct VehicleTypeSpec {
  std::string name;
  /// Whether the vehicle owns a V2X station.
  bool connected = false;
  FlowGraph flow;
  std::map<std::string, ModuleParams> params;

  const ModuleParams& params_for(const std::string& module) const;

  friend bool operator==(const VehicleTypeSpec&, const VehicleTypeSpec&) = default;
};

/// Accumulated knowledge of one vehicle; feeds its metrics.
struct Knowledge {
  std::unordered_set<PlateId> local;
  std::unordered_set<PlateId> received;
  std::uint64_t all = 0;
  TtvHistogram ttv;
  std::uint64_t errors = 0;
};

/// Everything the simulators expose to one vehicle for one tick.
struct SandboxEnv {
  Tick tick = 0;
  VehicleState pose;
  /// Camera output for this vehicle; nullptr when perception was not run.
  const std::vector<PerceivedObject>* perception = nullptr;
  const MatchTable* match = nullptr;
  double comm_range = 300.0;
  std::uint64_t seed = 0;
};

/// The sandbox API handle given to modules. It only reaches the owning
/// vehicle's own data and read-only simulator services.
class VehicleContext {
 public:
  VehicleContext(const SandboxEnv& env, const std::string& name,
                 std::optional<StationId> station, Knowledge& knowledge);

  Tick tick() const noexcept { return env_.tick; }
  VehicleId self() const noexcept { return env_.pose.id; }
  const VehicleState& pose() const noexcept { return env_.pose; }
  std::optional<StationId> station() const noexcept { return station_; }
  double comm_range() const noexcept { return env_.comm_range; }

  /// Throws ContractViolation when the runner did not provide perception.
  std::span<const PerceivedObject> perceive() const;
  /// Match-table lookup. Throws NotFoundError for plates not alive.
  std::optional<StationId> station_of(PlateId plate) const;

  /// Single-hop broadcast at the end of the tick. Extensions are dropped.
  /// Returns the payload size. Throws ContractViolation for vehicles without
  /// a station.
  std::size_t broadcast(const Cpm& cpm);

  /// Deterministic per (seed, vehicle, tick) stream shared by the vehicle's
  /// modules in execution order.
  Rng& rng();

  void note_local(PlateId plate);
  void note_received(PlateId plate);
  void note_verified(Tick delay);

  /// A CPM addressed from this vehicle with its current pose.
  Cpm make_cpm() const;

  std::vector<Bytes>& outgoing() noexcept { return outgoing_; }
  std::uint64_t bytes_sent() const noexcept { return bytes_; }
  void discard_outgoing() noexcept {
    outgoing_.clear();
    bytes_ = 0;
  }

 private:
  const SandboxEnv& env_;
  const std::string& name_;
  std::optional<StationId> station_;
  Knowledge& knowledge_;
  std::vector<Bytes> outgoing_;
  std::uint64_t bytes_ = 0;
  std::optional<Rng> rng_;
};

/// One atomic OBU function. Reads its inbox and the context, returns its
/// outbox; the runtime forwards the outbox to the module's successors.
class ObuModule {
 public:
  virtual ~ObuModule() = default;
  virtual std::vector<CpmPtr> process(std::span<const CpmPtr> inbox, VehicleContext& ctx) = 0;
};

using ModuleFactory = std::function<std::unique_ptr<ObuModule>(const ModuleParams&)>;

class ModuleRegistry {
 public:
  /// Registry holding the built-in modules.
  static ModuleRegistry with_builtins();

  /// Replaces any previous factory under `kind`.
  void add(const std::string& kind, ModuleFactory factory);
  bool contains(const std::string& kind) const { return factories_.contains(kind); }
  /// Throws SchemaError for unknown kinds.
  std::unique_ptr<ObuModule> create(const std::string& kind, const ModuleParams& params) const;

 private:
  std::map<std::string, ModuleFactory> factories_;
};

/// A live vehicle: its type, fresh module instances in execution order and
/// accumulated knowledge.
class Vehicle {
 public:
  VehicleId id() const noexcept { return id_; }
  const std::string& name() const noexcept { return name_; }
  std::optional<StationId> station() const noexcept { return station_; }
  const VehicleTypeSpec& spec() const noexcept { return *spec_; }
  const std::vector<std::string>& order() const noexcept { return order_; }
  bool uses_perception() const noexcept { return uses_perception_; }
  const Knowledge& knowledge() const noexcept { return knowledge_; }

 private:
  friend Vehicle build_vehicle(std::shared_ptr<const VehicleTypeSpec>, VehicleId, std::string,
                               std::optional<StationId>, const ModuleRegistry&);
  friend TickResult tick_vehicle(Vehicle&, std::span<const CpmPtr>, const SandboxEnv&);

  VehicleId id_ = 0;
  std::string name_;
  std::optional<StationId> station_;
  std::shared_ptr<const VehicleTypeSpec> spec_;
  std::vector<std::string> order_;
  std::vector<std::unique_ptr<ObuModule>> modules_;
  std::vector<std::vector<std::size_t>> successors_;
  std::vector<bool> entry_;
  bool uses_perception_ = false;
  Knowledge knowledge_;
};

/// Throws SchemaError for unknown module kinds and ValidationError for
/// cyclic flows. A station is required exactly when the type is connected.
Vehicle build_vehicle(std::shared_ptr<const VehicleTypeSpec> spec, VehicleId id, std::string name,
                      std::optional<StationId> station, const ModuleRegistry& registry);

struct TickResult {
  std::vector<Bytes> broadcasts;
  MetricsRecord record;
  /// Messages passed along DAG edges this tick.
  std::size_t edge_messages = 0;
  bool failed = false;
  std::string error;
};

/// Runs every module once in topological order. A throwing module aborts the
/// vehicle's tick: its broadcasts are discarded and an error is counted.
TickResult tick_vehicle(Vehicle& vehicle, std::span<const CpmPtr> network_inbox,
                        const SandboxEnv& env);

}  // namespace obusim
