#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ptree_fwd.hpp>

#include "obusim/sandbox.hpp"

namespace obusim {

/// Built-in vehicle types, written in the same text format users write:
///
///   [vehicle ConnectedVehicle]
///   connected = true
///   modules = perception, cpm_assembler, cpm_tx, object_store
///   entry = object_store
///   edge.perception = cpm_assembler, object_store
///   edge.cpm_assembler = cpm_tx
///   param.spam_generator.k = 5
extern const std::string_view kBuiltinVehicleTypes;

/// Parses one `[vehicle <name>]` section body. Throws SchemaError.
VehicleTypeSpec parse_vehicle_type(const std::string& name, const boost::property_tree::ptree& section);

/// Every `[vehicle ...]` section of an INI document; other sections are ignored.
std::vector<VehicleTypeSpec> parse_vehicle_types(const boost::property_tree::ptree& doc);
std::vector<VehicleTypeSpec> parse_vehicle_types(std::istream& in);

class VehicleTypeRegistry {
 public:
  /// UnconnectedVehicle, ConnectedVehicle, PoTVehicle, SpamAttacker,
  /// ReplayAttacker, SilenceAttacker and DummyVehicle.
  static VehicleTypeRegistry builtin();

  /// Validates the flow against `modules` and replaces any type of that name.
  void add(VehicleTypeSpec spec, const ModuleRegistry& modules);
  bool contains(const std::string& name) const { return types_.contains(name); }
  /// Throws SchemaError.
  std::shared_ptr<const VehicleTypeSpec> get(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, std::shared_ptr<const VehicleTypeSpec>> types_;
};

}  // namespace obusim
