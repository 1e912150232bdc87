#pragma once

// Block trace input: parsing, page splitting and size reduction.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "womv/workload.hpp"

namespace womv::workload {

enum class TraceFormat : std::uint8_t { MsrCsv, GenericCsv };

// Throws Error(ConfigError) for anything but "msr" / "generic".
TraceFormat parse_trace_format(const std::string& text);

struct TraceRecord {
  std::uint64_t timestamp_us = 0;  // informational; replay is closed-loop
  Op op = Op::Read;
  std::uint64_t offset = 0;  // bytes
  std::uint64_t length = 0;  // bytes, > 0

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

// MSR Cambridge: timestamp,hostname,disk,type,offset,size,latency (no header;
// timestamps are Windows filetime ticks). Generic: op,offset,size with an
// optional header line. Files ending in .gz are decompressed on the fly.
// Throws Error(ParseError) naming the line, Error(IoError) if unreadable.
std::vector<TraceRecord> parse_trace(const std::string& path, TraceFormat format);
std::vector<TraceRecord> parse_trace(std::istream& in, TraceFormat format,
                                     const std::string& origin = "<stream>");

struct PageAccess {
  Op op;
  std::uint64_t page;

  friend bool operator==(const PageAccess&, const PageAccess&) = default;
};

// One access per touched page; a 1-byte I/O touches one page.
std::vector<PageAccess> split_pages(const std::vector<TraceRecord>& records,
                                    std::uint32_t page_bytes = 4096);

struct ReducedTrace {
  std::vector<WorkloadEvent> events;
  std::uint64_t original_unique_pages = 0;
  std::uint32_t unique_pages = 0;  // distinct lpas in `events`, dense from 0
};

// Dense first-touch ids; when there are more than `target` unique pages they
// are folded by access-frequency rank: rank r lands on floor(r * target / U).
// Folded ids are renumbered by first touch so reduction is idempotent.
ReducedTrace reduce_trace(const std::vector<PageAccess>& accesses, std::uint64_t target,
                          std::uint64_t data_seed = 0);

// Generic CSV, one page-sized row per event; parses back to the same accesses.
void write_generic_csv(std::ostream& out, const std::vector<WorkloadEvent>& events,
                       std::uint32_t page_bytes = 4096);

}  // namespace womv::workload
