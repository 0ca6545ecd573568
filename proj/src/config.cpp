#include "obusim/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "obusim/errors.hpp"

namespace obusim {
namespace {

namespace pt = boost::property_tree;

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError("invalid value '" + text + "' for " + key);
  }
  return v;
}

class Section {
 public:
  Section(std::string name, const pt::ptree& body) : name_(std::move(name)), body_(body) {}

  template <typename T>
  void read(const std::string& key, T& target) const {
    if (auto v = body_.get_child_optional(pt::ptree::path_type(key, '\0'))) {
      target = parse_value<T>(name_ + "." + key, v->data());
    }
  }
  void read_degrees(const std::string& key, double& radians) const {
    double deg = radians * 180.0 / std::numbers::pi;
    read(key, deg);
    radians = deg * std::numbers::pi / 180.0;
  }
  std::optional<std::string> text(const std::string& key) const {
    if (auto v = body_.get_child_optional(pt::ptree::path_type(key, '\0'))) return v->data();
    return std::nullopt;
  }
  void only(std::initializer_list<std::string_view> allowed) const {
    for (const auto& [key, value] : body_) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        throw ConfigError("unknown key '" + key + "' in [" + name_ + "]");
      }
    }
  }

 private:
  std::string name_;
  const pt::ptree& body_;
};

}  // namespace

TickRange parse_tick_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("tick range must look like A:B, got '" + text + "'");
  const auto a = parse_value<Tick>("ticks", text.substr(0, colon));
  const auto b = parse_value<Tick>("ticks", text.substr(colon + 1));
  if (!(a < b)) throw ConfigError("tick range " + text + " is empty");
  return {a, b};
}

void ScenarioConfig::validate() const {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) throw ConfigError("cell_size must be positive");
  if (!(perception_radius > 0.0) || perception_radius > cell_size) {
    throw ConfigError("perception_radius must lie in (0, cell_size]");
  }
  if (!(comm_range > 0.0) || comm_range > cell_size) {
    throw ConfigError("comm_range must lie in (0, cell_size]");
  }
  perception.validate();
  if (!(vehicle_defaults.length > 0.0) || !(vehicle_defaults.width > 0.0)) {
    throw ConfigError("default vehicle dimensions must be positive");
  }
  if (mix.empty()) throw ConfigError("vehicle mix is empty");
  for (const auto& [type, weight] : mix) {
    if (!(weight > 0.0) || !std::isfinite(weight)) {
      throw ConfigError("mix weight for " + type + " must be positive and finite");
    }
    if (!types.contains(type)) throw ConfigError("mix names unknown vehicle type '" + type + "'");
  }
  for (const auto& [vehicle, type] : assign) {
    if (!types.contains(type)) {
      throw ConfigError("vehicle " + vehicle + " assigned unknown type '" + type + "'");
    }
  }
  if (ticks && !(ticks->first < ticks->second)) throw ConfigError("tick range is empty");
  if (workers == 0) throw ConfigError("workers must be at least 1");
}

ScenarioConfig parse_config(std::istream& in, const std::filesystem::path& base_dir,
                            const ModuleRegistry& modules) {
  pt::ptree doc;
  try {
    pt::read_ini(in, doc);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError("config: " + e.message(), e.line());
  }

  ScenarioConfig cfg;
  bool mix_seen = false;
  for (const auto& [name, body] : doc) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError("key '" + name + "' outside of any section");
    }
    const Section s(name, body);
    if (name == "scenario") {
      s.only({"seed", "ticks", "trace", "trace_format", "cell_size", "perception_radius",
              "comm_range", "workers", "out", "default_length", "default_width"});
      s.read("seed", cfg.seed);
      if (auto t = s.text("ticks")) cfg.ticks = parse_tick_range(*t);
      if (auto t = s.text("trace")) cfg.trace = base_dir / *t;
      if (auto f = s.text("trace_format")) {
        if (*f == "csv") cfg.trace_format = TraceFormat::Csv;
        else if (*f == "fcd") cfg.trace_format = TraceFormat::Fcd;
        else throw ConfigError("trace_format must be csv or fcd");
      }
      s.read("cell_size", cfg.cell_size);
      s.read("perception_radius", cfg.perception_radius);
      s.read("comm_range", cfg.comm_range);
      s.read("workers", cfg.workers);
      if (auto o = s.text("out")) cfg.out = *o;
      s.read("default_length", cfg.vehicle_defaults.length);
      s.read("default_width", cfg.vehicle_defaults.width);
    } else if (name == "perception") {
      s.only({"fov_half_angle_deg", "max_range", "max_plate_angle_deg", "plate_width"});
      s.read_degrees("fov_half_angle_deg", cfg.perception.fov_half_angle);
      s.read("max_range", cfg.perception.max_range);
      s.read_degrees("max_plate_angle_deg", cfg.perception.max_plate_angle);
      s.read("plate_width", cfg.perception.plate_width);
    } else if (name == "mix") {
      mix_seen = true;
      cfg.mix.clear();
      for (const auto& [type, weight] : body) {
        cfg.mix.push_back({type, parse_value<double>("mix." + type, weight.data())});
      }
    } else if (name == "assign") {
      for (const auto& [vehicle, type] : body) cfg.assign[vehicle] = type.data();
    } else if (name == "synth") {
      s.only({"seed", "vehicles", "ticks", "area"});
      SynthSpec synth;
      s.read("seed", synth.seed);
      s.read("vehicles", synth.vehicles);
      s.read("ticks", synth.ticks);
      s.read("area", synth.area);
      if (!(synth.area > 0.0)) throw ConfigError("synth.area must be positive");
      cfg.synth = synth;
    } else if (name.starts_with("vehicle ")) {
      // handled below, once all built-ins are known
    } else {
      throw ConfigError("unknown section [" + name + "]");
    }
  }
  for (auto& spec : parse_vehicle_types(doc)) cfg.types.add(std::move(spec), modules);
  if (mix_seen && cfg.mix.empty()) throw ConfigError("[mix] lists no vehicle types");
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path, const ModuleRegistry& modules) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  return parse_config(in, path.parent_path(), modules);
}

}  // namespace obusim
