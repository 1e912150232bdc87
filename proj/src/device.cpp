#include "womv/device.hpp"

#include <algorithm>
#include <cstring>

#include "womv/error.hpp"

namespace womv::device {

namespace {

[[noreturn]] void bad_param(const std::string& what) {
  throw Error(ErrorCode::ParameterOutOfRange, what);
}

}  // namespace

void Geometry::validate() const {
  if (num_pus == 0 || chunks_per_pu == 0 || pages_per_chunk == 0 || page_size_bytes == 0) {
    bad_param("geometry counts must all be >= 1");
  }
  if (bits_per_cell == 0 || 8 % bits_per_cell != 0) {
    bad_param("bits_per_cell must be 1, 2, 4 or 8");
  }
}

std::string to_string(PageType type) {
  switch (type) {
    case PageType::L: return "L";
    case PageType::CL: return "CL";
    case PageType::CU: return "CU";
    case PageType::U: return "U";
  }
  return "T" + std::to_string(static_cast<int>(type));
}

LatencyModel LatencyModel::qlc_default() {
  LatencyModel m;
  m.write_us = {850, 2300, 3750, 5200};
  m.read_us = {48, 64, 80, 96};
  return m;
}

LatencyModel LatencyModel::mlc_default() {
  LatencyModel m;
  m.write_us = {850, 2300};
  m.read_us = {48, 64};
  return m;
}

void LatencyModel::validate() const {
  if (write_us.empty() || write_us.size() != read_us.size()) {
    bad_param("latency model needs matching, non-empty read and write tables");
  }
}

Device::Device(const Geometry& geometry, const LatencyModel& latency)
    : geometry_(geometry),
      latency_(latency),
      level_ceiling_(static_cast<std::uint8_t>((1u << geometry.bits_per_cell) - 1)) {
  geometry_.validate();
  latency_.validate();
  cells_.assign(geometry_.total_pages() * geometry_.page_size_bytes, 0);
  watermarks_.assign(static_cast<std::size_t>(geometry_.num_pus) * geometry_.chunks_per_pu, -1);
  busy_until_.assign(geometry_.num_pus, 0);
  stats_.erases_per_eu.assign(geometry_.num_eus(), 0);
  stats_.busy_us_per_pu.assign(geometry_.num_pus, 0);
  rebuild_program_table();
}

void Device::set_level_ceiling(std::uint8_t max_level) {
  if (max_level >= (1u << geometry_.bits_per_cell)) bad_param("level ceiling above 2^N - 1");
  level_ceiling_ = max_level;
  rebuild_program_table();
}

void Device::rebuild_program_table() {
  const unsigned n = geometry_.bits_per_cell;
  const unsigned mask = (1u << n) - 1;
  program_ok_.assign(256 * 256, 0);
  for (unsigned old_byte = 0; old_byte < 256; ++old_byte) {
    for (unsigned new_byte = 0; new_byte < 256; ++new_byte) {
      bool ok = true;
      for (unsigned shift = 0; shift < 8; shift += n) {
        const unsigned o = (old_byte >> shift) & mask;
        const unsigned v = (new_byte >> shift) & mask;
        ok = ok && v >= o && v <= level_ceiling_;
      }
      program_ok_[(old_byte << 8) | new_byte] = ok ? 1 : 0;
    }
  }
}

void Device::check_addr(const PageAddr& addr) const {
  if (addr.pu >= geometry_.num_pus || addr.chunk >= geometry_.chunks_per_pu ||
      addr.page >= geometry_.pages_per_chunk) {
    throw Error(ErrorCode::AddressOutOfRange,
                "page address (" + std::to_string(addr.pu) + "," + std::to_string(addr.chunk) +
                    "," + std::to_string(addr.page) + ")");
  }
}

Micros Device::occupy(std::uint32_t pu, Micros issue, Micros duration) {
  const Micros start = std::max(issue, busy_until_[pu]);
  busy_until_[pu] = start + duration;
  stats_.busy_us_per_pu[pu] += duration;
  return busy_until_[pu];
}

ProgramReport Device::program_page(const PageAddr& addr, std::span<const std::uint8_t> levels,
                                   std::span<const std::uint32_t> skipped_cells, Micros issue) {
  check_addr(addr);
  const std::size_t page_bytes = geometry_.page_size_bytes;
  if (levels.size() != page_bytes) bad_param("program buffer is not one page");

  std::int32_t& mark = watermarks_[chunk_index(addr.pu, addr.chunk)];
  if (static_cast<std::int64_t>(addr.page) <= mark) {
    throw Error(ErrorCode::OutOfOrderProgram,
                "page " + std::to_string(addr.page) + " not after watermark " +
                    std::to_string(mark) + " in chunk " + std::to_string(addr.chunk) + " of PU " +
                    std::to_string(addr.pu));
  }

  std::uint8_t* cells = cells_.data() + page_index(addr) * page_bytes;
  unsigned all_ok = 1;
  for (std::size_t b = 0; b < page_bytes; ++b) {
    all_ok &= program_ok_[(static_cast<unsigned>(cells[b]) << 8) | levels[b]];
  }
  const unsigned n = geometry_.bits_per_cell;
  const unsigned cells_per_byte = 8 / n;
  for (std::uint32_t cell : skipped_cells) {
    const std::size_t b = cell / cells_per_byte;
    const unsigned shift = (cell % cells_per_byte) * n;
    const unsigned mask = (1u << n) - 1;
    if (b >= page_bytes || ((levels[b] >> shift) & mask) != ((cells[b] >> shift) & mask)) {
      bad_param("skipped cell " + std::to_string(cell) + " was given a new level");
    }
  }
  if (!all_ok) {
    const unsigned mask = (1u << n) - 1;
    for (std::size_t b = 0; b < page_bytes; ++b) {
      for (unsigned shift = 0; shift < 8; shift += n) {
        const unsigned o = (cells[b] >> shift) & mask;
        const unsigned v = (levels[b] >> shift) & mask;
        const std::size_t cell = b * cells_per_byte + shift / n;
        if (v < o) {
          throw Error(ErrorCode::VoltageDecrease,
                      "cell " + std::to_string(cell) + " from level " + std::to_string(o) +
                          " to " + std::to_string(v));
        }
        if (v > level_ceiling_) {
          bad_param("cell " + std::to_string(cell) + " above level ceiling");
        }
      }
    }
  }

  std::memcpy(cells, levels.data(), page_bytes);
  mark = static_cast<std::int32_t>(addr.page);
  ++stats_.page_programs;
  return ProgramReport{occupy(addr.pu, issue, latency_.write_latency(page_type(addr))),
                       static_cast<std::uint32_t>(skipped_cells.size())};
}

Micros Device::read_page_into(const PageAddr& addr, Micros issue, std::span<std::uint8_t> out) {
  check_addr(addr);
  const std::size_t page_bytes = geometry_.page_size_bytes;
  if (out.size() != page_bytes) bad_param("read buffer is not one page");
  std::memcpy(out.data(), cells_.data() + page_index(addr) * page_bytes, page_bytes);
  ++stats_.page_reads;
  return occupy(addr.pu, issue, latency_.read_latency(page_type(addr)));
}

ReadResult Device::read_page(const PageAddr& addr, Micros issue) {
  ReadResult r;
  r.levels.resize(geometry_.page_size_bytes);
  r.completion = read_page_into(addr, issue, r.levels);
  return r;
}

Micros Device::erase_eu(std::uint32_t eu, Micros issue) {
  if (eu >= geometry_.num_eus()) {
    throw Error(ErrorCode::AddressOutOfRange, "EU " + std::to_string(eu));
  }
  const std::size_t chunk_bytes =
      static_cast<std::size_t>(geometry_.pages_per_chunk) * geometry_.page_size_bytes;
  Micros completion = issue;
  for (std::uint32_t pu = 0; pu < geometry_.num_pus; ++pu) {
    std::memset(cells_.data() + page_index(PageAddr{pu, eu, 0}) * geometry_.page_size_bytes, 0,
                chunk_bytes);
    watermarks_[chunk_index(pu, eu)] = -1;
    completion = std::max(completion, occupy(pu, issue, latency_.erase_us));
  }
  ++stats_.eu_erases;
  ++stats_.erases_per_eu[eu];
  return completion;
}

void Device::reopen_chunk_cycle(std::uint32_t eu) {
  if (eu >= geometry_.num_eus()) {
    throw Error(ErrorCode::AddressOutOfRange, "EU " + std::to_string(eu));
  }
  for (std::uint32_t pu = 0; pu < geometry_.num_pus; ++pu) watermarks_[chunk_index(pu, eu)] = -1;
}

std::span<const std::uint8_t> Device::peek(const PageAddr& addr) const {
  check_addr(addr);
  return {cells_.data() + page_index(addr) * geometry_.page_size_bytes,
          geometry_.page_size_bytes};
}

std::int64_t Device::watermark(std::uint32_t pu, std::uint32_t chunk) const {
  check_addr(PageAddr{pu, chunk, 0});
  return watermarks_[chunk_index(pu, chunk)];
}

Micros Device::makespan() const noexcept {
  return busy_until_.empty() ? 0 : *std::max_element(busy_until_.begin(), busy_until_.end());
}

}  // namespace womv::device
