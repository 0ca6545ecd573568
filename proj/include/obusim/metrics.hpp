#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "obusim/types.hpp"

namespace obusim {

/// Time-to-verify histogram: delay in ticks -> number of verified objects.
using TtvHistogram = std::map<std::int64_t, std::uint64_t>;

/// One vehicle's counters at one tick. Object counts and the TTV histogram
/// accumulate over the vehicle's lifetime; bytes_sent is for this tick only.
struct MetricsRecord {
  Tick tick = 0;
  VehicleId vehicle = 0;
  std::string id;
  std::string type;
  double x = 0.0;
  double y = 0.0;
  std::uint64_t bytes_sent = 0;
  std::uint64_t local_objects = 0;
  std::uint64_t received_objects = 0;
  /// Size of the union of locally perceived and received objects.
  std::uint64_t all_objects = 0;
  TtvHistogram ttv;
  /// Ticks in which one of the vehicle's modules failed.
  std::uint64_t errors = 0;

  friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

/// One decoded line of metrics.jsonl. Decoded records carry `id` but not the
/// in-memory `vehicle` key.
struct TickRecords {
  Tick tick = 0;
  std::vector<MetricsRecord> vehicles;

  friend bool operator==(const TickRecords&, const TickRecords&) = default;
};

struct IndexEntry {
  Tick tick = 0;
  std::uint64_t offset = 0;
  /// Line length in bytes, without the trailing newline.
  std::uint64_t length = 0;

  friend bool operator==(const IndexEntry&, const IndexEntry&) = default;
};

using MetricsIndex = std::vector<IndexEntry>;

inline constexpr std::string_view kMetricsFile = "metrics.jsonl";
inline constexpr std::string_view kIndexFile = "metrics.idx";

/// Canonical JSON line (no newline): fixed key order, shortest round-trip
/// floats. Vehicles are written in the order given.
std::string to_json_line(Tick tick, std::span<const MetricsRecord> records);
TickRecords parse_json_line(std::string_view line);

/// Appends one JSON line per tick to <dir>/metrics.jsonl and one
/// `tick offset length` line to <dir>/metrics.idx.
class MetricsSink {
 public:
  /// Creates `dir` if needed and truncates both files. Throws IoError.
  explicit MetricsSink(const std::filesystem::path& dir);

  /// Throws ContractViolation for a tick not greater than the previous one
  /// and IoError when a write fails.
  void record_tick(Tick tick, std::span<const MetricsRecord> records);
  void flush();

  const MetricsIndex& index() const noexcept { return index_; }
  std::filesystem::path data_path() const { return dir_ / kMetricsFile; }
  std::filesystem::path index_path() const { return dir_ / kIndexFile; }

 private:
  std::filesystem::path dir_;
  std::ofstream data_;
  std::ofstream idx_;
  std::uint64_t offset_ = 0;
  MetricsIndex index_;
};

MetricsIndex read_index(std::istream& in);
MetricsIndex read_index(const std::filesystem::path& path);

/// Index lookup followed by a single positioned read. Throws NotFoundError.
TickRecords seek(const MetricsIndex& index, std::istream& data, Tick tick);
/// Reference path: scans the data stream line by line. Throws NotFoundError.
TickRecords linear_scan(std::istream& data, Tick tick);

/// Every tick of a run, in file order.
struct RunData {
  std::vector<TickRecords> ticks;

  const TickRecords& at(Tick tick) const;
};

RunData read_run(std::istream& data);
/// Reads <dir>/metrics.jsonl. Throws IoError when missing.
RunData load_run(const std::filesystem::path& dir);

/// Mean bytes_sent over the vehicles of each tick; 0 for an empty tick.
std::vector<std::pair<Tick, double>> avg_bandwidth(const RunData& run);

/// Element-wise sum of the vehicles' TTV histograms at `tick`.
TtvHistogram ttv_distribution(const RunData& run, Tick tick);

using CellKey = std::pair<std::int64_t, std::int64_t>;

/// Cooperative perception ratio per square cell of side `cell` metres:
/// sum(all - local) / sum(local) over the vehicles located in the cell.
/// Cells without local objects have no defined ratio and are omitted.
std::map<CellKey, double> cpr(const RunData& run, Tick tick, double cell);

}  // namespace obusim
