#include "obusim/metrics.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <sstream>

#include <json.hpp>

#include "obusim/errors.hpp"

namespace obusim {
namespace {

using Json = nlohmann::ordered_json;

Json record_json(const MetricsRecord& r) {
  Json ttv = Json::object();
  for (const auto& [delay, count] : r.ttv) ttv[std::to_string(delay)] = count;
  Json j = Json::object();
  j["id"] = r.id;
  j["type"] = r.type;
  j["x"] = r.x;
  j["y"] = r.y;
  j["bytes_sent"] = r.bytes_sent;
  j["local_objects"] = r.local_objects;
  j["received_objects"] = r.received_objects;
  j["all_objects"] = r.all_objects;
  j["ttv"] = std::move(ttv);
  j["errors"] = r.errors;
  return j;
}

std::int64_t parse_delay(const std::string& key) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), v);
  if (ec != std::errc() || ptr != key.data() + key.size()) {
    throw ParseError("metrics: bad ttv delay '" + key + "'", 0);
  }
  return v;
}

}  // namespace

std::string to_json_line(Tick tick, std::span<const MetricsRecord> records) {
  Json vehicles = Json::array();
  for (const auto& r : records) vehicles.push_back(record_json(r));
  Json line = Json::object();
  line["tick"] = tick;
  line["vehicles"] = std::move(vehicles);
  return line.dump();
}

TickRecords parse_json_line(std::string_view line) {
  TickRecords out;
  try {
    const auto j = Json::parse(line);
    out.tick = j.at("tick").get<Tick>();
    for (const auto& v : j.at("vehicles")) {
      MetricsRecord r;
      r.tick = out.tick;
      r.id = v.at("id").get<std::string>();
      r.type = v.at("type").get<std::string>();
      r.x = v.at("x").get<double>();
      r.y = v.at("y").get<double>();
      r.bytes_sent = v.at("bytes_sent").get<std::uint64_t>();
      r.local_objects = v.at("local_objects").get<std::uint64_t>();
      r.received_objects = v.at("received_objects").get<std::uint64_t>();
      r.all_objects = v.at("all_objects").get<std::uint64_t>();
      for (const auto& [key, count] : v.at("ttv").items()) {
        r.ttv[parse_delay(key)] = count.get<std::uint64_t>();
      }
      r.errors = v.at("errors").get<std::uint64_t>();
      out.vehicles.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("metrics: ") + e.what(), 0);
  }
  return out;
}

MetricsSink::MetricsSink(const std::filesystem::path& dir) : dir_(dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
  data_.open(data_path(), std::ios::binary | std::ios::trunc);
  idx_.open(index_path(), std::ios::binary | std::ios::trunc);
  if (!data_ || !idx_) throw IoError("cannot open metrics files in " + dir_.string());
}

void MetricsSink::record_tick(Tick tick, std::span<const MetricsRecord> records) {
  if (!index_.empty() && tick <= index_.back().tick) {
    throw ContractViolation("metrics tick " + std::to_string(tick) + " not after " +
                            std::to_string(index_.back().tick));
  }
  const std::string line = to_json_line(tick, records);
  data_.write(line.data(), static_cast<std::streamsize>(line.size()));
  data_.put('\n');
  idx_ << tick << ' ' << offset_ << ' ' << line.size() << '\n';
  if (!data_ || !idx_) throw IoError("write failed in " + dir_.string());
  index_.push_back({tick, offset_, line.size()});
  offset_ += line.size() + 1;
}

void MetricsSink::flush() {
  data_.flush();
  idx_.flush();
  if (!data_ || !idx_) throw IoError("flush failed in " + dir_.string());
}

MetricsIndex read_index(std::istream& in) {
  MetricsIndex index;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    std::istringstream fields(line);
    IndexEntry e;
    std::string rest;
    if (!(fields >> e.tick >> e.offset >> e.length) || (fields >> rest)) {
      throw ParseError("metrics.idx: malformed line", n);
    }
    index.push_back(e);
  }
  return index;
}

MetricsIndex read_index(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_index(in);
}

TickRecords seek(const MetricsIndex& index, std::istream& data, Tick tick) {
  auto it = std::lower_bound(index.begin(), index.end(), tick,
                             [](const IndexEntry& e, Tick t) { return e.tick < t; });
  if (it == index.end() || it->tick != tick) {
    throw NotFoundError("tick " + std::to_string(tick) + " not in index");
  }
  std::string line(it->length, '\0');
  data.clear();
  data.seekg(static_cast<std::streamoff>(it->offset));
  data.read(line.data(), static_cast<std::streamsize>(line.size()));
  if (!data) throw IoError("short read at offset " + std::to_string(it->offset));
  return parse_json_line(line);
}

TickRecords linear_scan(std::istream& data, Tick tick) {
  data.clear();
  data.seekg(0);
  std::string line;
  while (std::getline(data, line)) {
    if (line.empty()) continue;
    auto rec = parse_json_line(line);
    if (rec.tick == tick) return rec;
  }
  throw NotFoundError("tick " + std::to_string(tick) + " not in metrics");
}

const TickRecords& RunData::at(Tick tick) const {
  auto it = std::lower_bound(ticks.begin(), ticks.end(), tick,
                             [](const TickRecords& r, Tick t) { return r.tick < t; });
  if (it == ticks.end() || it->tick != tick) {
    throw NotFoundError("tick " + std::to_string(tick) + " not in run");
  }
  return *it;
}

RunData read_run(std::istream& data) {
  RunData run;
  std::string line;
  while (std::getline(data, line)) {
    if (!line.empty()) run.ticks.push_back(parse_json_line(line));
  }
  return run;
}

RunData load_run(const std::filesystem::path& dir) {
  const auto path = dir / kMetricsFile;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_run(in);
}

std::vector<std::pair<Tick, double>> avg_bandwidth(const RunData& run) {
  std::vector<std::pair<Tick, double>> out;
  out.reserve(run.ticks.size());
  for (const auto& t : run.ticks) {
    double sum = 0.0;
    for (const auto& v : t.vehicles) sum += static_cast<double>(v.bytes_sent);
    out.emplace_back(t.tick, t.vehicles.empty() ? 0.0 : sum / static_cast<double>(t.vehicles.size()));
  }
  return out;
}

TtvHistogram ttv_distribution(const RunData& run, Tick tick) {
  TtvHistogram out;
  for (const auto& v : run.at(tick).vehicles) {
    for (const auto& [delay, count] : v.ttv) out[delay] += count;
  }
  return out;
}

std::map<CellKey, double> cpr(const RunData& run, Tick tick, double cell) {
  if (!(cell > 0.0)) throw ConfigError("cpr cell size must be positive");
  struct Sums {
    std::uint64_t local = 0;
    std::uint64_t extra = 0;
  };
  std::map<CellKey, Sums> sums;
  for (const auto& v : run.at(tick).vehicles) {
    const CellKey key{static_cast<std::int64_t>(std::floor(v.x / cell)),
                      static_cast<std::int64_t>(std::floor(v.y / cell))};
    auto& s = sums[key];
    s.local += v.local_objects;
    s.extra += v.all_objects - v.local_objects;
  }
  std::map<CellKey, double> out;
  for (const auto& [key, s] : sums) {
    if (s.local > 0) out[key] = static_cast<double>(s.extra) / static_cast<double>(s.local);
  }
  return out;
}

}  // namespace obusim
