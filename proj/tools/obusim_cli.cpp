#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "obusim/config.hpp"
#include "obusim/errors.hpp"
#include "obusim/scenario.hpp"
#include "obusim/trace.hpp"

namespace {

int run_command(const std::string& config_path, const std::optional<std::string>& trace,
                const std::optional<std::string>& out, const std::optional<std::uint64_t>& seed,
                const std::optional<std::string>& ticks, const std::optional<std::size_t>& workers) {
  auto cfg = obusim::load_config(config_path);
  if (trace) {
    cfg.trace = *trace;
    cfg.synth.reset();
  }
  if (out) cfg.out = *out;
  if (seed) cfg.seed = *seed;
  if (ticks) cfg.ticks = obusim::parse_tick_range(*ticks);
  if (workers) cfg.workers = *workers;
  cfg.validate();

  const auto data = obusim::scenario_trace(cfg);
  const auto summary = obusim::run_scenario(cfg, data, cfg.out);
  std::cout << "ticks " << summary.first_tick << ".." << summary.end_tick << ", " << summary.vehicles_seen << " vehicles, "
            << summary.total_bytes << " bytes sent, " << summary.failed_ticks
            << " failed vehicle ticks, mean " << summary.mean_wall() * 1000.0 << " ms/tick\n"
            << "metrics written to " << cfg.out.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Connected-vehicle on-board unit simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a scenario");
  std::string config;
  std::optional<std::string> trace, out, ticks;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  run->add_option("--config", config, "Scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--trace", trace, "Trace file, overriding the scenario");
  run->add_option("--out", out, "Output directory");
  run->add_option("--seed", seed, "Random seed");
  run->add_option("--ticks", ticks, "Tick range A:B (B exclusive)");
  run->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

  auto* report = app.add_subcommand("report", "Summarise a finished run as CSV");
  std::string run_dir, kind;
  std::optional<obusim::Tick> tick;
  double cell = 500.0;
  report->add_option("--run", run_dir, "Run output directory")->required()->check(CLI::ExistingDirectory);
  report->add_option("--kind", kind, "bandwidth, ttv, cpr or timing")
      ->required()
      ->check(CLI::IsMember({"bandwidth", "ttv", "cpr", "timing"}));
  report->add_option("--tick", tick, "Tick for ttv and cpr (default: last)");
  report->add_option("--cell", cell, "Cell side in metres for cpr")->check(CLI::PositiveNumber);

  auto* synth = app.add_subcommand("synth", "Write a synthetic CSV trace");
  std::uint64_t synth_seed = 1;
  std::size_t vehicles = 100, synth_ticks = 60;
  double area = 1000.0;
  std::string synth_out;
  synth->add_option("--vehicles", vehicles, "Number of vehicles");
  synth->add_option("--ticks", synth_ticks, "Number of ticks");
  synth->add_option("--area", area, "Side of the square area in metres")->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_seed, "Random seed");
  synth->add_option("--out", synth_out, "CSV file to write")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_command(config, trace, out, seed, ticks, workers);
    if (*report) {
      obusim::ReportOptions options;
      options.tick = tick;
      options.cell = cell;
      obusim::write_report(run_dir, kind, options, std::cout);
      return 0;
    }
    if (*synth) {
      std::ofstream file(synth_out);
      if (!file) throw obusim::IoError("cannot write " + synth_out);
      obusim::write_csv(obusim::synth_traffic(synth_seed, vehicles, synth_ticks, area), file);
      return 0;
    }
  } catch (const obusim::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
