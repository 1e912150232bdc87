#pragma once

// Experiment orchestration shared by the womv_sim tool and the acceptance
// binary. Config keys are documented in README.md.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "womv/device.hpp"
#include "womv/ftl.hpp"
#include "womv/metrics.hpp"
#include "womv/trace.hpp"
#include "womv/workload.hpp"

namespace womv::cli {

struct TraceSource {
  std::string path;
  workload::TraceFormat format = workload::TraceFormat::MsrCsv;
  std::uint64_t target_pages = 0;  // 0 = keep every unique page
  double drive_factor = 2.0;       // physical pages per unique page
  bool auto_size = true;           // derive chunks_per_pu from the footprint
  std::uint32_t min_eus = 16;
};

struct ExperimentConfig {
  device::Geometry geometry;
  device::LatencyModel latency = device::LatencyModel::qlc_default();
  std::string latency_name = "qlc-default";
  ftl::FtlConfig ftl;
  std::vector<ftl::FtlMode> modes;  // sweep legs
  std::string baseline = "NO_WOM";

  // Exactly one of these drives the run.
  std::optional<workload::MicrobenchSpec> microbench;
  std::uint64_t logical_pages = 0;  // microbench; 0 = default rule
  double microbench_passes = 0.0;   // alternative to total_bytes
  std::optional<TraceSource> trace;

  std::optional<std::uint64_t> seed;
  std::string label;
  bool audit = true;  // FTL self-check at the end of every run

  std::string out;  // empty or "-" = stdout
  metrics::Format format = metrics::Format::Json;
  std::string latency_log;
};

// Parses a config document; unknown keys are rejected.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& config);

device::LatencyModel latency_preset(const std::string& name);

// Microbenchmark logical space when none is configured: what the FTL would
// expose for a k=1 code on this geometry, so every mode fits.
std::uint64_t default_microbench_pages(const ExperimentConfig& config);

struct RunResult {
  metrics::RunReport report;
  std::vector<metrics::LatencyRecord> latency_log;  // filled when requested
  std::optional<ftl::FtlStats> snapshot;            // see RunOptions
};

struct RunOptions {
  bool keep_latency_log = false;
  bool quiet = false;  // suppress progress on stderr
  // Copy the FTL counters after this many events (0 = never), e.g. to
  // discount warm-up.
  std::uint64_t snapshot_after = 0;
};

// Replays the configured workload closed-loop under `mode`: each request
// issues when the previous one completes. Throws womv::Error on failure.
RunResult run_experiment(const ExperimentConfig& config, const ftl::FtlMode& mode,
                         const RunOptions& options = {});

// One leg per config.modes entry, on up to `threads` threads (0 = pick from
// WOMV_SIM_THREADS or the hardware). Reports come back in mode order.
std::vector<RunResult> run_sweep(const ExperimentConfig& config, unsigned threads = 0,
                                 const RunOptions& options = {});

// Loaded, split and reduced trace plus the geometry it was sized for.
struct PreparedTrace {
  workload::ReducedTrace trace;
  device::Geometry geometry;
  std::uint64_t logical_pages = 0;
  std::uint64_t drive_pages_target = 0;
};
PreparedTrace prepare_trace(const ExperimentConfig& config, const ftl::FtlMode& mode);

// Reads a trace, reduces it to at most `target` pages and writes generic CSV.
workload::ReducedTrace reduce_file(const std::string& in, workload::TraceFormat format,
                                   std::uint64_t target, std::uint32_t page_bytes,
                                   const std::string& out);

unsigned sweep_threads();

}  // namespace womv::cli
