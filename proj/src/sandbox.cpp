#include "obusim/sandbox.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <queue>
#include <unordered_map>

#include "obusim/errors.hpp"

namespace obusim {

std::uint64_t ModuleParams::get_uint(const std::string& key, std::uint64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::uint64_t v = 0;
  const auto& s = it->second;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("parameter '" + key + "' must be a non-negative integer, got '" + s + "'");
  }
  return v;
}

double ModuleParams::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  double v = 0;
  const auto& s = it->second;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("parameter '" + key + "' must be a number, got '" + s + "'");
  }
  return v;
}

const ModuleParams& VehicleTypeSpec::params_for(const std::string& module) const {
  static const ModuleParams kEmpty;
  auto it = params.find(module);
  return it == params.end() ? kEmpty : it->second;
}

std::vector<std::string> validate_flow(const FlowGraph& graph, const ModuleRegistry* registry) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    if (!index.emplace(graph.nodes[i], i).second) {
      throw SchemaError("module '" + graph.nodes[i] + "' declared twice");
    }
    if (registry && !registry->contains(graph.nodes[i])) {
      throw SchemaError("unknown module '" + graph.nodes[i] + "'");
    }
  }
  auto lookup = [&](const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) throw SchemaError("flow references undeclared module '" + name + "'");
    return it->second;
  };

  const std::size_t n = graph.nodes.size();
  std::vector<std::vector<std::size_t>> succ(n);
  std::vector<std::size_t> indegree(n, 0);
  for (const auto& [from, tos] : graph.edges) {
    const auto u = lookup(from);
    for (const auto& to : tos) {
      const auto v = lookup(to);
      if (std::find(succ[u].begin(), succ[u].end(), v) != succ[u].end()) continue;
      succ[u].push_back(v);
      ++indegree[v];
    }
  }
  for (const auto& e : graph.entry) lookup(e);

  // Kahn's algorithm; the min-heap on declaration index fixes tie order.
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indegree[i] == 0) ready.push(i);
  std::vector<std::string> order;
  order.reserve(n);
  while (!ready.empty()) {
    const auto u = ready.top();
    ready.pop();
    order.push_back(graph.nodes[u]);
    for (auto v : succ[u])
      if (--indegree[v] == 0) ready.push(v);
  }
  if (order.size() == n) return order;

  // Every remaining node has a remaining predecessor; walking predecessors
  // from any of them must revisit a node, which closes a cycle.
  std::vector<std::size_t> pred(n, n);
  for (std::size_t u = 0; u < n; ++u)
    for (auto v : succ[u])
      if (indegree[u] > 0 && indegree[v] > 0) pred[v] = u;
  std::size_t v = 0;
  while (indegree[v] == 0) ++v;
  std::vector<bool> seen(n, false);
  while (!seen[v]) {
    seen[v] = true;
    v = pred[v];
  }
  throw ValidationError("flow contains a cycle through edge " + graph.nodes[pred[v]] + " -> " +
                        graph.nodes[v]);
}

VehicleContext::VehicleContext(const SandboxEnv& env, const std::string& name,
                               std::optional<StationId> station, Knowledge& knowledge)
    : env_(env), name_(name), station_(station), knowledge_(knowledge) {}

std::span<const PerceivedObject> VehicleContext::perceive() const {
  if (env_.perception == nullptr) {
    throw ContractViolation("perception was not provided to vehicle " + name_);
  }
  return *env_.perception;
}

std::optional<StationId> VehicleContext::station_of(PlateId plate) const {
  if (env_.match == nullptr) throw NotFoundError("no match table available");
  return env_.match->station_of(plate);
}

std::size_t VehicleContext::broadcast(const Cpm& cpm) {
  if (!station_) throw ContractViolation("vehicle " + name_ + " is not connected to V2X");
  Bytes payload = serialize(cpm);
  const std::size_t n = payload.size();
  outgoing_.push_back(std::move(payload));
  bytes_ += n;
  return n;
}

Rng& VehicleContext::rng() {
  if (!rng_) {
    rng_.emplace(combine_seed(combine_seed(env_.seed, hash_string(name_)),
                              static_cast<std::uint64_t>(env_.tick)));
  }
  return *rng_;
}

void VehicleContext::note_local(PlateId plate) {
  if (knowledge_.local.insert(plate).second && !knowledge_.received.contains(plate)) {
    ++knowledge_.all;
  }
}

void VehicleContext::note_received(PlateId plate) {
  if (knowledge_.received.insert(plate).second && !knowledge_.local.contains(plate)) {
    ++knowledge_.all;
  }
}

void VehicleContext::note_verified(Tick delay) { ++knowledge_.ttv[delay]; }

Cpm VehicleContext::make_cpm() const {
  Cpm cpm;
  cpm.sender_station = station_.value_or(0);
  cpm.gen_tick = env_.tick;
  cpm.sender_x = env_.pose.x;
  cpm.sender_y = env_.pose.y;
  cpm.sender_heading = env_.pose.heading;
  return cpm;
}

void ModuleRegistry::add(const std::string& kind, ModuleFactory factory) {
  factories_[kind] = std::move(factory);
}

std::unique_ptr<ObuModule> ModuleRegistry::create(const std::string& kind,
                                                  const ModuleParams& params) const {
  auto it = factories_.find(kind);
  if (it == factories_.end()) throw SchemaError("unknown module '" + kind + "'");
  return it->second(params);
}

Vehicle build_vehicle(std::shared_ptr<const VehicleTypeSpec> spec, VehicleId id, std::string name,
                      std::optional<StationId> station, const ModuleRegistry& registry) {
  if (!spec) throw SchemaError("no vehicle type given");
  if (spec->connected != station.has_value()) {
    throw ContractViolation("vehicle type " + spec->name +
                            (spec->connected ? " needs a station" : " must not have a station"));
  }
  Vehicle v;
  v.id_ = id;
  v.name_ = std::move(name);
  v.station_ = station;
  v.order_ = validate_flow(spec->flow, &registry);

  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < v.order_.size(); ++i) pos.emplace(v.order_[i], i);
  v.successors_.resize(v.order_.size());
  for (const auto& [from, tos] : spec->flow.edges) {
    auto& out = v.successors_[pos.at(from)];
    for (const auto& to : tos) {
      const auto t = pos.at(to);
      if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
    }
  }
  v.entry_.assign(v.order_.size(), false);
  for (const auto& e : spec->flow.entry) v.entry_[pos.at(e)] = true;

  v.modules_.reserve(v.order_.size());
  for (const auto& kind : v.order_) {
    v.modules_.push_back(registry.create(kind, spec->params_for(kind)));
    v.uses_perception_ |= kind == "perception";
  }
  v.spec_ = std::move(spec);
  return v;
}

TickResult tick_vehicle(Vehicle& vehicle, std::span<const CpmPtr> network_inbox,
                        const SandboxEnv& env) {
  TickResult result;
  VehicleContext ctx(env, vehicle.name_, vehicle.station_, vehicle.knowledge_);
  const std::size_t n = vehicle.modules_.size();
  std::vector<std::vector<CpmPtr>> inboxes(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (vehicle.entry_[i]) inboxes[i].assign(network_inbox.begin(), network_inbox.end());
  }

  try {
    for (std::size_t i = 0; i < n; ++i) {
      auto outbox = vehicle.modules_[i]->process(inboxes[i], ctx);
      inboxes[i].clear();
      for (auto s : vehicle.successors_[i]) {
        inboxes[s].insert(inboxes[s].end(), outbox.begin(), outbox.end());
        result.edge_messages += outbox.size();
      }
    }
    result.broadcasts = std::move(ctx.outgoing());
  } catch (const std::exception& e) {
    ctx.discard_outgoing();
    ++vehicle.knowledge_.errors;
    result.failed = true;
    result.error = e.what();
  }

  auto& r = result.record;
  r.tick = env.tick;
  r.vehicle = vehicle.id_;
  r.id = vehicle.name_;
  r.type = vehicle.spec_->name;
  r.x = env.pose.x;
  r.y = env.pose.y;
  r.bytes_sent = ctx.bytes_sent();
  r.local_objects = vehicle.knowledge_.local.size();
  r.received_objects = vehicle.knowledge_.received.size();
  r.all_objects = vehicle.knowledge_.all;
  r.ttv = vehicle.knowledge_.ttv;
  r.errors = vehicle.knowledge_.errors;
  return result;
}

}  // namespace obusim
