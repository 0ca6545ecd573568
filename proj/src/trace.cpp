#include "obusim/trace.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <unordered_map>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "obusim/errors.hpp"
#include "obusim/rng.hpp"

namespace obusim {
namespace {

// Builds a Trace tick by tick, interning vehicle names on first sight.
class TraceBuilder {
 public:
  explicit TraceBuilder(const TraceDefaults& defaults) : defaults_(defaults) {}

  VehicleId intern(const std::string& name) {
    auto [it, inserted] = ids_.try_emplace(name, static_cast<VehicleId>(trace_.names.size()));
    if (inserted) trace_.names.push_back(name);
    return it->second;
  }

  // Opens (or reopens, for floor-bucketed fractional timestamps) `tick`.
  void begin_tick(Tick tick) {
    if (!trace_.ticks.empty() && trace_.ticks.back().tick == tick) return;
    if (!trace_.ticks.empty() && trace_.ticks.back().tick > tick) {
      throw ValidationError("non-monotonic timestamps: tick " + std::to_string(tick) +
                            " after tick " + std::to_string(trace_.ticks.back().tick));
    }
    finish_tick();
    trace_.ticks.push_back(TraceTick{tick, {}});
  }

  // `replace` lets a later sample inside the same integer tick win.
  void add(VehicleState s, std::optional<double> length, std::optional<double> width,
           bool replace) {
    s.length = length.value_or(defaults_.length);
    s.width = width.value_or(defaults_.width);
    if (!(s.length > 0.0) || !(s.width > 0.0)) {
      throw ValidationError("vehicle '" + trace_.names[s.id] + "' has non-positive dimensions");
    }
    if (!std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.heading)) {
      throw ValidationError("vehicle '" + trace_.names[s.id] + "' has a non-finite pose");
    }
    s.heading = normalize_angle(s.heading);
    auto& states = trace_.ticks.back().states;
    auto [it, inserted] = slot_.try_emplace(s.id, states.size());
    if (inserted) {
      states.push_back(s);
    } else if (replace) {
      states[it->second] = s;
    } else {
      throw ValidationError("duplicate vehicle '" + trace_.names[s.id] + "' in tick " +
                            std::to_string(trace_.ticks.back().tick));
    }
  }

  Trace finish() {
    finish_tick();
    return std::move(trace_);
  }

 private:
  void finish_tick() {
    slot_.clear();
    if (trace_.ticks.empty()) return;
    auto& states = trace_.ticks.back().states;
    std::sort(states.begin(), states.end(),
              [](const VehicleState& a, const VehicleState& b) { return a.id < b.id; });
  }

  TraceDefaults defaults_;
  Trace trace_;
  std::unordered_map<std::string, VehicleId> ids_;
  std::unordered_map<VehicleId, std::size_t> slot_;
};

double parse_number(std::string_view text, std::string_view what, std::size_t line) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ParseError("invalid number '" + std::string(text) + "' for " + std::string(what), line);
  }
  return v;
}

std::optional<double> optional_number(std::string_view text, std::string_view what,
                                      std::size_t line) {
  if (text.find_first_not_of(" \r") == std::string_view::npos) return std::nullopt;
  return parse_number(text, what, line);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

Trace parse_fcd(std::istream& in, const TraceDefaults& defaults) {
  namespace pt = boost::property_tree;
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  TraceBuilder builder(defaults);
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return builder.finish();

  pt::ptree doc;
  try {
    std::istringstream ss(text);
    pt::read_xml(ss, doc);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError("malformed FCD XML: " + e.message(), e.line());
  }

  std::optional<double> last_time;
  for (const auto& [root_name, root] : doc) {
    if (root_name == "<xmlcomment>" || root_name == "<xmldecl>") continue;
    for (const auto& [name, step] : root) {
      if (name != "timestep") continue;
      auto time_attr = step.get_optional<std::string>("<xmlattr>.time");
      if (!time_attr) throw ParseError("timestep without time attribute", 0);
      double time = parse_number(*time_attr, "timestep time", 0);
      if (last_time && time <= *last_time) {
        throw ValidationError("non-monotonic timestamps: " + format_double(time) + " after " +
                              format_double(*last_time));
      }
      const bool reopened = last_time && std::floor(*last_time) == std::floor(time);
      last_time = time;
      builder.begin_tick(static_cast<Tick>(std::floor(time)));

      std::unordered_map<std::string, bool> seen_here;
      for (const auto& [vname, veh] : step) {
        if (vname != "vehicle") continue;
        auto id = veh.get_optional<std::string>("<xmlattr>.id");
        auto x = veh.get_optional<std::string>("<xmlattr>.x");
        auto y = veh.get_optional<std::string>("<xmlattr>.y");
        auto angle = veh.get_optional<std::string>("<xmlattr>.angle");
        if (!id || !x || !y || !angle) {
          throw ParseError("vehicle element needs id, x, y and angle attributes", 0);
        }
        if (!seen_here.emplace(*id, true).second) {
          throw ValidationError("duplicate vehicle '" + *id + "' in timestep " + *time_attr);
        }
        VehicleState s;
        s.id = builder.intern(*id);
        s.x = parse_number(*x, "x", 0);
        s.y = parse_number(*y, "y", 0);
        double deg = parse_number(*angle, "angle", 0);
        s.heading = std::numbers::pi / 2.0 - deg * std::numbers::pi / 180.0;
        std::optional<double> length, width;
        if (auto l = veh.get_optional<std::string>("<xmlattr>.length")) length = parse_number(*l, "length", 0);
        if (auto w = veh.get_optional<std::string>("<xmlattr>.width")) width = parse_number(*w, "width", 0);
        builder.add(s, length, width, reopened);
      }
    }
  }
  return builder.finish();
}

Trace parse_csv(std::istream& in, const TraceDefaults& defaults) {
  static constexpr std::array<std::string_view, 7> kColumns{"tick", "id",      "x",    "y",
                                                            "heading", "length", "width"};
  TraceBuilder builder(defaults);
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) return builder.finish();
  ++lineno;

  // length and width are optional columns.
  constexpr std::size_t kRequired = 5;
  constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);
  std::array<std::size_t, kColumns.size()> col{};
  std::size_t width = 0;
  {
    auto header = split_commas(line);
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
      auto it = std::find_if(header.begin(), header.end(),
                             [&](std::string_view h) { return trim(h) == kColumns[c]; });
      if (it == header.end()) {
        if (c < kRequired) {
          throw SchemaError("trace CSV is missing column '" + std::string(kColumns[c]) + "'");
        }
        col[c] = kAbsent;
        continue;
      }
      col[c] = static_cast<std::size_t>(it - header.begin());
      width = std::max(width, col[c] + 1);
    }
  }
  auto optional_cell = [&](const std::vector<std::string_view>& cells, std::size_t c) {
    return col[c] == kAbsent ? std::string_view{} : cells[col[c]];
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cells = split_commas(line);
    if (cells.size() < width) throw ParseError("trace CSV row has too few cells", lineno);
    double tick_value = parse_number(cells[col[0]], "tick", lineno);
    if (tick_value != std::floor(tick_value)) {
      throw ParseError("tick must be an integer", lineno);
    }
    builder.begin_tick(static_cast<Tick>(tick_value));
    auto name = trim(cells[col[1]]);
    if (name.empty()) throw ParseError("empty vehicle id", lineno);
    VehicleState s;
    s.id = builder.intern(std::string(name));
    s.x = parse_number(cells[col[2]], "x", lineno);
    s.y = parse_number(cells[col[3]], "y", lineno);
    s.heading = parse_number(cells[col[4]], "heading", lineno);
    builder.add(s, optional_number(optional_cell(cells, 5), "length", lineno),
                optional_number(optional_cell(cells, 6), "width", lineno), false);
  }
  return builder.finish();
}

void write_csv(const Trace& trace, std::ostream& out) {
  out << "tick,id,x,y,heading,length,width\n";
  for (const auto& t : trace.ticks) {
    for (const auto& s : t.states) {
      out << t.tick << ',' << trace.names[s.id] << ',' << format_double(s.x) << ','
          << format_double(s.y) << ',' << format_double(s.heading) << ','
          << format_double(s.length) << ',' << format_double(s.width) << '\n';
    }
  }
}

Trace load_trace(const std::filesystem::path& path, TraceFormat format,
                 const TraceDefaults& defaults) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trace file " + path.string());
  return format == TraceFormat::Fcd ? parse_fcd(in, defaults) : parse_csv(in, defaults);
}

Trace load_trace(const std::filesystem::path& path, const TraceDefaults& defaults) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return load_trace(path, ext == ".xml" ? TraceFormat::Fcd : TraceFormat::Csv, defaults);
}

Trace synth_traffic(std::uint64_t seed, std::size_t n_vehicles, std::size_t n_ticks, double area) {
  constexpr double kLaneSpacing = 100.0;
  constexpr double kKeepRight = 1.75;

  struct Mover {
    bool horizontal;
    double dir;
    double lateral;
    double start;
    double speed;
  };

  Rng rng(mix64(seed));
  const auto lanes = static_cast<std::uint64_t>(std::max(1.0, std::floor(area / kLaneSpacing)));
  std::vector<Mover> movers;
  movers.reserve(n_vehicles);
  Trace trace;
  trace.names.reserve(n_vehicles);
  for (std::size_t i = 0; i < n_vehicles; ++i) {
    Mover m;
    m.horizontal = rng.below(2) == 0;
    m.dir = rng.below(2) == 0 ? 1.0 : -1.0;
    const auto lane = rng.below(lanes);
    m.lateral = (static_cast<double>(lane) + 0.5) * kLaneSpacing - m.dir * kKeepRight;
    m.start = rng.uniform(0.0, area);
    m.speed = rng.uniform(5.0, 25.0);
    movers.push_back(m);
    trace.names.push_back("veh" + std::to_string(i));
  }

  trace.ticks.reserve(n_ticks);
  for (std::size_t t = 0; t < n_ticks; ++t) {
    TraceTick tick{static_cast<Tick>(t), {}};
    tick.states.reserve(n_vehicles);
    for (std::size_t i = 0; i < n_vehicles; ++i) {
      const auto& m = movers[i];
      double along = std::fmod(m.start + m.dir * m.speed * static_cast<double>(t), area);
      if (along < 0.0) along += area;
      VehicleState s;
      s.id = static_cast<VehicleId>(i);
      if (m.horizontal) {
        s.x = along;
        s.y = m.lateral;
        s.heading = m.dir > 0 ? 0.0 : std::numbers::pi;
      } else {
        s.x = m.lateral;
        s.y = along;
        s.heading = m.dir > 0 ? std::numbers::pi / 2.0 : -std::numbers::pi / 2.0;
      }
      tick.states.push_back(s);
    }
    trace.ticks.push_back(std::move(tick));
  }
  return trace;
}

}  // namespace obusim
