#include "obusim/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include "obusim/errors.hpp"
#include "obusim/perception.hpp"

namespace obusim {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

std::string assign_type(std::uint64_t seed, std::string_view name, std::span<const TypeWeight> mix) {
  if (mix.empty()) throw ConfigError("vehicle mix is empty");
  double total = 0.0;
  for (const auto& w : mix) total += w.weight;
  const double target = unit_from_hash(combine_seed(seed, hash_string(name))) * total;
  double acc = 0.0;
  for (const auto& w : mix) {
    acc += w.weight;
    if (target < acc) return w.type;
  }
  return mix.back().type;
}

WorkerPool::WorkerPool(std::size_t workers) : workers_(std::max<std::size_t>(workers, 1)) {}

void WorkerPool::parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) const {
  const std::size_t threads = std::min(workers_, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  constexpr std::size_t kChunk = 16;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t begin = next.fetch_add(kChunk);
      if (begin >= count) return;
      const std::size_t end = std::min(count, begin + kChunk);
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads - 1);
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
  }
  if (failure) std::rethrow_exception(failure);
}

Simulation::Simulation(const ScenarioConfig& cfg, const Trace& trace, ModuleRegistry modules)
    : cfg_(cfg),
      trace_(trace),
      modules_(std::move(modules)),
      pool_(cfg.workers),
      network_(cfg.comm_range) {
  cfg_.validate();
  if (cfg_.ticks) {
    first_ = cfg_.ticks->first;
    end_ = cfg_.ticks->second;
  } else if (!trace_.ticks.empty()) {
    first_ = trace_.ticks.front().tick;
    end_ = trace_.ticks.back().tick + 1;
  }
  next_ = first_;
  while (cursor_ < trace_.ticks.size() && trace_.ticks[cursor_].tick < first_) ++cursor_;
}

const Vehicle* Simulation::vehicle(VehicleId id) const {
  auto it = std::lower_bound(vehicles_.begin(), vehicles_.end(), id,
                             [](const Vehicle& v, VehicleId k) { return v.id() < k; });
  return it != vehicles_.end() && it->id() == id ? &*it : nullptr;
}

void Simulation::spawn_and_despawn(std::span<const VehicleState> states) {
  std::vector<Vehicle> next;
  next.reserve(states.size());
  auto old = vehicles_.begin();
  for (const auto& s : states) {
    while (old != vehicles_.end() && old->id() < s.id) {
      match_.remove(old->id());
      ++old;
    }
    if (old != vehicles_.end() && old->id() == s.id) {
      next.push_back(std::move(*old));
      ++old;
      continue;
    }
    const auto& name = trace_.name_of(s.id);
    auto assigned = cfg_.assign.find(name);
    const auto type = cfg_.types.get(assigned != cfg_.assign.end()
                                         ? assigned->second
                                         : assign_type(cfg_.seed, name, cfg_.mix));
    const auto station = match_.add(s.id, type->connected);
    seen_.insert(s.id);
    next.push_back(build_vehicle(type, s.id, name, station, modules_));
  }
  for (; old != vehicles_.end(); ++old) match_.remove(old->id());
  vehicles_ = std::move(next);
}

std::span<const MetricsRecord> Simulation::step() {
  if (done()) throw ContractViolation("simulation already reached its last tick");
  const Tick t = next_++;
  const auto wall_start = Clock::now();
  timings_ = PhaseTimings{};
  timings_.tick = t;

  // Positions.
  auto start = Clock::now();
  static const std::vector<VehicleState> kNone;
  while (cursor_ < trace_.ticks.size() && trace_.ticks[cursor_].tick < t) ++cursor_;
  const auto& states = cursor_ < trace_.ticks.size() && trace_.ticks[cursor_].tick == t
                           ? trace_.ticks[cursor_].states
                           : kNone;
  spawn_and_despawn(states);
  grid_ = GridIndex::rebuild(states, cfg_.cell_size);
  timings_.position = seconds_since(start);

  start = Clock::now();
  const Inboxes inboxes = network_.step(t);
  timings_.network = seconds_since(start);

  // Camera perception for vehicles that run it.
  start = Clock::now();
  const std::size_t n = vehicles_.size();
  std::vector<std::vector<PerceivedObject>> seen(n);
  pool_.parallel_for(n, [&](std::size_t i) {
    if (!vehicles_[i].uses_perception()) return;
    const auto& ego = states[i];
    const auto nearby = grid_.get_nearby_vehicles(ego.id, cfg_.perception_radius);
    seen[i] = perceive(ego, nearby, cfg_.perception, t);
  });
  timings_.perception = seconds_since(start);

  // Module graphs.
  start = Clock::now();
  std::vector<TickResult> results(n);
  pool_.parallel_for(n, [&](std::size_t i) {
    auto& v = vehicles_[i];
    SandboxEnv env;
    env.tick = t;
    env.pose = states[i];
    env.perception = v.uses_perception() ? &seen[i] : nullptr;
    env.match = &match_;
    env.comm_range = cfg_.comm_range;
    env.seed = cfg_.seed;
    std::span<const CpmPtr> inbox;
    if (v.station()) {
      if (auto it = inboxes.find(*v.station()); it != inboxes.end()) inbox = it->second;
    }
    results[i] = tick_vehicle(v, inbox, env);
  });
  timings_.agents = seconds_since(start);

  // Broadcasts are enqueued in vehicle-key order whatever the worker count.
  start = Clock::now();
  network_.begin_tick(t, grid_, match_);
  records_.clear();
  records_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = results[i];
    failed_ += r.failed ? 1 : 0;
    for (auto& payload : r.broadcasts) network_.submit(*vehicles_[i].station(), std::move(payload));
    records_.push_back(std::move(r.record));
  }
  timings_.network += seconds_since(start);
  timings_.wall = seconds_since(wall_start);
  return records_;
}

double RunSummary::mean_wall() const {
  if (timings.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& t : timings) sum += t.wall;
  return sum / static_cast<double>(timings.size());
}

Trace scenario_trace(const ScenarioConfig& cfg) {
  if (cfg.synth) {
    return synth_traffic(cfg.synth->seed, cfg.synth->vehicles, cfg.synth->ticks, cfg.synth->area);
  }
  if (cfg.trace.empty()) throw ConfigError("scenario needs a trace file or a [synth] section");
  if (cfg.trace_format) return load_trace(cfg.trace, *cfg.trace_format, cfg.vehicle_defaults);
  return load_trace(cfg.trace, cfg.vehicle_defaults);
}

RunSummary run_scenario(const ScenarioConfig& cfg, const Trace& trace,
                        const std::filesystem::path& out, ModuleRegistry modules) {
  Simulation sim(cfg, trace, std::move(modules));
  MetricsSink sink(out);
  std::ofstream timings(out / kTimingsFile, std::ios::trunc);
  if (!timings) throw IoError("cannot open " + (out / kTimingsFile).string());
  timings << "tick,position_s,perception_s,agents_s,network_s,metrics_s,wall_s\n";

  RunSummary summary;
  summary.first_tick = sim.first_tick();
  summary.end_tick = sim.end_tick();
  while (!sim.done()) {
    const auto records = sim.step();
    auto t = sim.last_timings();
    const auto start = Clock::now();
    sink.record_tick(t.tick, records);
    t.metrics = seconds_since(start);
    t.wall += t.metrics;
    timings << t.tick << ',' << t.position << ',' << t.perception << ',' << t.agents << ','
            << t.network << ',' << t.metrics << ',' << t.wall << '\n';
    summary.timings.push_back(t);
  }
  sink.flush();
  if (!timings.flush()) throw IoError("write failed for " + (out / kTimingsFile).string());
  summary.total_bytes = sim.network().total_bytes();
  summary.failed_ticks = sim.failed_ticks();
  summary.vehicles_seen = sim.vehicles_seen();
  return summary;
}

void write_report(const std::filesystem::path& run_dir, std::string_view kind,
                  const ReportOptions& options, std::ostream& out) {
  if (kind == "timing") {
    const auto path = run_dir / kTimingsFile;
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    while (std::getline(in, line)) {
      // Drop the wall column; the report lists the phases.
      out << line.substr(0, line.rfind(',')) << '\n';
    }
    return;
  }
  if (kind != "bandwidth" && kind != "ttv" && kind != "cpr") {
    throw ConfigError("unknown report kind '" + std::string(kind) + "'");
  }
  const RunData run = load_run(run_dir);
  if (run.ticks.empty()) throw NotFoundError("run in " + run_dir.string() + " has no ticks");
  const Tick tick = options.tick.value_or(run.ticks.back().tick);
  if (kind == "bandwidth") {
    out << "tick,avg_bytes_sent\n";
    for (const auto& [t, avg] : avg_bandwidth(run)) out << t << ',' << format_double(avg) << '\n';
  } else if (kind == "ttv") {
    out << "delay,count\n";
    for (const auto& [delay, count] : ttv_distribution(run, tick)) out << delay << ',' << count << '\n';
  } else {
    out << "cell_x,cell_y,cpr\n";
    for (const auto& [cell, ratio] : cpr(run, tick, options.cell)) {
      out << cell.first << ',' << cell.second << ',' << format_double(ratio) << '\n';
    }
  }
}

}  // namespace obusim
