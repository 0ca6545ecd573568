#include "obusim/vehicle_types.hpp"

#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "obusim/errors.hpp"
#include "obusim/modules.hpp"

namespace obusim {

const std::string_view kBuiltinVehicleTypes = R"(
[vehicle UnconnectedVehicle]
connected = false
modules = perception, object_store
edge.perception = object_store

[vehicle ConnectedVehicle]
connected = true
modules = perception, cpm_assembler, cpm_tx, object_store
entry = object_store
edge.perception = cpm_assembler, object_store
edge.cpm_assembler = cpm_tx

[vehicle PoTVehicle]
connected = true
modules = perception, proof_generator, cpm_assembler, cpm_tx, object_store, proof_verifier
entry = object_store, proof_verifier
edge.perception = proof_generator, cpm_assembler, object_store, proof_verifier
edge.proof_generator = cpm_assembler
edge.cpm_assembler = cpm_tx
param.proof_verifier.provers = 2

[vehicle SpamAttacker]
connected = true
modules = perception, spam_generator, cpm_tx, object_store
entry = object_store
edge.perception = object_store
edge.spam_generator = cpm_tx
param.spam_generator.k = 5

[vehicle ReplayAttacker]
connected = true
modules = perception, replay, cpm_tx, object_store
entry = object_store, replay
edge.perception = replay, object_store
edge.replay = cpm_tx
param.replay.capacity = 50
param.replay.per_tick = 1

[vehicle SilenceAttacker]
connected = true
modules = perception, object_store
entry = object_store
edge.perception = object_store

[vehicle DummyVehicle]
connected = false
modules =
)";

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(text);
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = item.find_last_not_of(" \t");
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw SchemaError("'" + key + "' must be true or false, got '" + v + "'");
}

}  // namespace

VehicleTypeSpec parse_vehicle_type(const std::string& name,
                                   const boost::property_tree::ptree& section) {
  VehicleTypeSpec spec;
  spec.name = name;
  bool has_modules = false;
  for (const auto& [key, node] : section) {
    const auto value = node.data();
    const auto where = "vehicle type " + name + ": ";
    if (key == "connected") {
      spec.connected = parse_bool(key, value);
    } else if (key == "modules") {
      spec.flow.nodes = split_list(value);
      has_modules = true;
    } else if (key == "entry") {
      spec.flow.entry = split_list(value);
    } else if (key.starts_with("edge.")) {
      spec.flow.edges.emplace_back(key.substr(5), split_list(value));
    } else if (key.starts_with("param.")) {
      const auto rest = key.substr(6);
      const auto dot = rest.find('.');
      if (dot == std::string::npos || dot == 0 || dot + 1 == rest.size()) {
        throw SchemaError(where + "parameter key must be param.<module>.<name>: " + key);
      }
      spec.params[rest.substr(0, dot)].set(rest.substr(dot + 1), value);
    } else {
      throw SchemaError(where + "unknown key '" + key + "'");
    }
  }
  if (!has_modules) throw SchemaError("vehicle type " + name + " lacks a modules list");
  if (!spec.connected && !spec.flow.entry.empty()) {
    throw SchemaError("vehicle type " + name + " has network entry modules but is not connected");
  }
  validate_flow(spec.flow);
  return spec;
}

std::vector<VehicleTypeSpec> parse_vehicle_types(const boost::property_tree::ptree& doc) {
  std::vector<VehicleTypeSpec> out;
  for (const auto& [section, body] : doc) {
    if (!section.starts_with("vehicle ")) continue;
    auto name = section.substr(8);
    const auto b = name.find_first_not_of(' ');
    if (b == std::string::npos) throw SchemaError("vehicle section without a type name");
    out.push_back(parse_vehicle_type(name.substr(b), body));
  }
  return out;
}

std::vector<VehicleTypeSpec> parse_vehicle_types(std::istream& in) {
  boost::property_tree::ptree doc;
  try {
    boost::property_tree::read_ini(in, doc);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError(e.message(), e.line());
  }
  return parse_vehicle_types(doc);
}

VehicleTypeRegistry VehicleTypeRegistry::builtin() {
  static const VehicleTypeRegistry kRegistry = [] {
    VehicleTypeRegistry r;
    const auto modules = ModuleRegistry::with_builtins();
    std::istringstream in{std::string(kBuiltinVehicleTypes)};
    for (auto& spec : parse_vehicle_types(in)) r.add(std::move(spec), modules);
    return r;
  }();
  return kRegistry;
}

void VehicleTypeRegistry::add(VehicleTypeSpec spec, const ModuleRegistry& modules) {
  validate_flow(spec.flow, &modules);
  auto name = spec.name;
  types_[name] = std::make_shared<const VehicleTypeSpec>(std::move(spec));
}

std::shared_ptr<const VehicleTypeSpec> VehicleTypeRegistry::get(const std::string& name) const {
  auto it = types_.find(name);
  if (it == types_.end()) throw SchemaError("unknown vehicle type '" + name + "'");
  return it->second;
}

std::vector<std::string> VehicleTypeRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, spec] : types_) out.push_back(name);
  return out;
}

}  // namespace obusim
