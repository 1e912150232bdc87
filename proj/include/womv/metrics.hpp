#pragma once

// Run accounting and reports.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "womv/ftl.hpp"
#include "womv/workload.hpp"

namespace womv::metrics {

using device::Micros;

inline constexpr int kSchemaVersion = 1;

struct Percentiles {
  Micros p50 = 0;
  Micros p95 = 0;
  Micros p99 = 0;

  friend bool operator==(const Percentiles&, const Percentiles&) = default;
};

// Nearest rank: the ceil(p/100 * n)-th smallest value. nullopt when empty.
std::optional<Percentiles> percentiles(std::vector<Micros> values);

struct LatencyRecord {
  std::uint64_t seq = 0;
  Micros issue_us = 0;
  Micros complete_us = 0;
  workload::Op op = workload::Op::Write;
};

struct RunReport {
  std::string label;     // usually the mode name
  std::string mode;
  std::string workload;
  std::uint64_t seed = 0;
  nlohmann::json config;  // echo of the experiment config

  std::uint64_t total_eus = 0;
  std::uint32_t page_size_bytes = 0;
  std::uint32_t group_size = 1;

  std::uint64_t user_pages_written = 0;
  std::uint64_t user_bytes_written = 0;
  std::uint64_t device_page_programs = 0;
  std::uint64_t device_bytes_written = 0;
  std::uint64_t device_reads_charged = 0;
  std::uint64_t write_path_reads = 0;
  std::uint64_t gc_reads = 0;
  std::uint64_t user_reads = 0;
  std::uint64_t eus_erased = 0;
  std::uint64_t eus_reopened = 0;
  std::uint64_t relocations = 0;
  std::uint64_t gc_steps = 0;
  std::uint64_t padding_slots = 0;
  std::uint64_t patched_cells = 0;
  Micros makespan_us = 0;
  double write_amplification = 0.0;
  std::optional<Percentiles> read_latency;
  std::optional<Percentiles> write_latency;
  std::vector<std::uint64_t> erase_histogram;  // per EU
  std::uint64_t max_eu_erases = 0;

  friend bool operator==(const RunReport&, const RunReport&) = default;
};

// Builds a report from a finished run. Latency lists are per request.
RunReport finalize(const ftl::Ftl& ftl, std::vector<Micros> read_latencies,
                   std::vector<Micros> write_latencies);

// --- endurance ---------------------------------------------------------------

struct EnduranceModel {
  std::uint64_t pe_limit = 3000;

  static EnduranceModel qlc() { return {3000}; }
  static EnduranceModel mlc() { return {10000}; }
};

// pe_limit * total_EUs * user_bytes / eus_erased; nullopt when nothing was erased.
std::optional<double> endurance_bytes(const RunReport& report, const EnduranceModel& model);

struct EnduranceRatio {
  enum class Status : std::uint8_t { Finite, Infinite, Undefined };
  Status status = Status::Undefined;
  double value = 0.0;  // meaningful when Finite

  std::string to_string() const;
};

// a over b. a without erases -> Infinite; b without erases -> Undefined.
EnduranceRatio endurance_ratio(const RunReport& a, const EnduranceModel& model_a,
                               const RunReport& b, const EnduranceModel& model_b);

// --- comparison --------------------------------------------------------------

struct ComparisonRow {
  std::string label;
  std::uint64_t eus_erased = 0;
  std::optional<double> erase_reduction_pct;  // nullopt when the baseline erased nothing
  Micros makespan_us = 0;
  std::optional<double> makespan_delta_pct;
  double write_amplification = 0.0;
  std::uint64_t device_reads_charged = 0;
  std::optional<Micros> read_p95_us;
};

struct Comparison {
  std::string baseline;
  std::vector<ComparisonRow> rows;
};

// Throws Error(ConfigError) if no report carries the baseline label.
Comparison compare(const std::vector<RunReport>& reports, const std::string& baseline);
// "70.0% reduction", "-25.0% reduction", "n/a".
std::string reduction_text(const std::optional<double>& pct);
void print_comparison(std::ostream& out, const Comparison& cmp);
void write_comparison_csv(std::ostream& out, const Comparison& cmp);

// --- emit --------------------------------------------------------------------

enum class Format : std::uint8_t { Json, Csv };
Format parse_format(const std::string& text);

nlohmann::json to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& j);

// Fixed CSV header, one row per report.
const std::string& csv_header();
std::string csv_row(const RunReport& report);

// JSON: one object, or an array when several reports are given.
void emit(std::ostream& out, const std::vector<RunReport>& reports, Format format);
void emit_file(const std::string& path, const std::vector<RunReport>& reports, Format format);
std::vector<RunReport> load_reports(const std::string& path);

void write_latency_log(std::ostream& out, const std::vector<LatencyRecord>& records);

}  // namespace womv::metrics
