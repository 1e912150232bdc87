#pragma once

// Emulated open-channel flash device: parallel units (PUs) of chunks of
// pages, one same-indexed chunk per PU forming an erase unit (EU). Each PU
// serves one operation at a time; distinct PUs overlap freely.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace womv::device {

// Simulated time in microseconds.
using Micros = std::uint64_t;

struct Geometry {
  std::uint32_t num_pus = 4;
  std::uint32_t chunks_per_pu = 160;
  std::uint32_t pages_per_chunk = 400;
  std::uint32_t page_size_bytes = 4096;
  std::uint32_t bits_per_cell = 4;

  std::uint32_t cells_per_page() const noexcept { return page_size_bytes * 8 / bits_per_cell; }
  std::uint32_t num_eus() const noexcept { return chunks_per_pu; }
  std::uint32_t pages_per_eu() const noexcept { return num_pus * pages_per_chunk; }
  std::uint64_t total_pages() const noexcept {
    return std::uint64_t{num_eus()} * pages_per_eu();
  }
  std::uint64_t capacity_bytes() const noexcept { return total_pages() * page_size_bytes; }

  // Throws Error(ParameterOutOfRange).
  void validate() const;

  friend bool operator==(const Geometry&, const Geometry&) = default;
};

struct PageAddr {
  std::uint32_t pu = 0;
  std::uint32_t chunk = 0;  // == EU id
  std::uint32_t page = 0;

  friend bool operator==(const PageAddr&, const PageAddr&) = default;
};

// Page types cycle by page index within a chunk. QLC uses all four; MLC
// alternates L and CL.
enum class PageType : std::uint8_t { L = 0, CL = 1, CU = 2, U = 3 };

std::string to_string(PageType type);

struct LatencyModel {
  // Indexed by page type; the number of entries is the type cycle length.
  std::vector<Micros> write_us;
  std::vector<Micros> read_us;
  Micros const_read_us = 40;
  Micros const_write_us = 200;
  Micros erase_us = 2000;

  static LatencyModel qlc_default();
  static LatencyModel mlc_default();

  PageType page_type(std::uint32_t page) const noexcept {
    return static_cast<PageType>(page % write_us.size());
  }
  Micros read_latency(PageType t) const noexcept {
    return read_us[static_cast<std::size_t>(t)] + const_read_us;
  }
  Micros write_latency(PageType t) const noexcept {
    return write_us[static_cast<std::size_t>(t)] + const_write_us;
  }

  void validate() const;

  friend bool operator==(const LatencyModel&, const LatencyModel&) = default;
};

struct ProgramReport {
  Micros completion = 0;
  std::uint32_t skipped_count = 0;
};

struct ReadResult {
  std::vector<std::uint8_t> levels;
  Micros completion = 0;
};

struct DeviceStats {
  std::uint64_t page_reads = 0;
  std::uint64_t page_programs = 0;
  std::uint64_t eu_erases = 0;
  std::vector<std::uint64_t> erases_per_eu;
  std::vector<Micros> busy_us_per_pu;
};

class Device {
 public:
  Device(const Geometry& geometry, const LatencyModel& latency);

  const Geometry& geometry() const noexcept { return geometry_; }
  const LatencyModel& latency() const noexcept { return latency_; }

  // Highest level a program may set; defaults to 2^N - 1.
  void set_level_ceiling(std::uint8_t max_level);

  // `levels` holds the packed target level of every cell. Cells listed in
  // `skipped_cells` must keep their current level. Throws OutOfOrderProgram
  // unless addr.page is past the chunk's watermark, and VoltageDecrease if any
  // cell would go down.
  ProgramReport program_page(const PageAddr& addr, std::span<const std::uint8_t> levels,
                             std::span<const std::uint32_t> skipped_cells, Micros issue);

  ReadResult read_page(const PageAddr& addr, Micros issue);
  // Same as read_page but copies into caller storage; returns the completion time.
  Micros read_page_into(const PageAddr& addr, Micros issue, std::span<std::uint8_t> out);

  // Resets every chunk of the EU, each PU busy for erase_us. Returns the
  // completion of the slowest PU.
  Micros erase_eu(std::uint32_t eu, Micros issue);

  // Starts a new program pass over the EU without erasing: watermarks go back
  // to before page 0, cell levels stay.
  void reopen_chunk_cycle(std::uint32_t eu);

  // Untimed view of a page's levels (simulator bookkeeping and tests).
  std::span<const std::uint8_t> peek(const PageAddr& addr) const;

  PageType page_type(const PageAddr& addr) const noexcept {
    return latency_.page_type(addr.page);
  }
  // -1 when nothing has been programmed in the current pass.
  std::int64_t watermark(std::uint32_t pu, std::uint32_t chunk) const;
  Micros pu_busy_until(std::uint32_t pu) const { return busy_until_.at(pu); }
  Micros makespan() const noexcept;

  const DeviceStats& stats() const noexcept { return stats_; }

 private:
  void check_addr(const PageAddr& addr) const;
  std::size_t page_index(const PageAddr& addr) const noexcept {
    return (static_cast<std::size_t>(addr.chunk) * geometry_.num_pus + addr.pu) *
               geometry_.pages_per_chunk +
           addr.page;
  }
  std::size_t chunk_index(std::uint32_t pu, std::uint32_t chunk) const noexcept {
    return static_cast<std::size_t>(chunk) * geometry_.num_pus + pu;
  }
  Micros occupy(std::uint32_t pu, Micros issue, Micros duration);
  void rebuild_program_table();

  Geometry geometry_;
  LatencyModel latency_;
  std::uint8_t level_ceiling_;
  std::vector<std::uint8_t> cells_;        // packed levels, page_size_bytes per page
  std::vector<std::int32_t> watermarks_;   // per (chunk, pu)
  std::vector<Micros> busy_until_;         // per PU
  std::vector<std::uint8_t> program_ok_;   // [old << 8 | new] for one packed byte
  DeviceStats stats_;
};

}  // namespace womv::device
