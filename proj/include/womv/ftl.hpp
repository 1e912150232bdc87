#pragma once

// Host-side flash translation layer with WOM-v encoding.
//
// User pages are staged in a ring buffer and striped round-robin over the
// parallel units of the single active EU. Under WOM-v(k,N) every logical page
// expands to a group of N/k physical pages; the L2P map records each of them.
// Garbage collection is greedy (fewest valid pages first); what it does with
// the victim depends on the write mode:
//
//   NO_WOM    relocate valid pages, erase.
//   baseline  relocate valid pages, then erase only if some page has crossed
//             the ECC threshold; otherwise reopen the EU for overwrite.
//   GC_OPT    if no page is blocked, leave valid pages in place (pinned) and
//             reopen; writes in the next pass skip them.
//   NR        no read-before-write: each page carries a generation counter and
//             every program moves the whole page one generation up.

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "womv/codec.hpp"
#include "womv/device.hpp"

namespace womv::ftl {

using device::Micros;
using Lpa = std::uint32_t;

inline constexpr std::uint32_t kUnmapped = 0xffffffffu;

struct FtlMode {
  bool wom = false;
  unsigned data_bits = 0;  // k; NO_WOM stores N bits per cell directly
  unsigned cell_bits = 0;  // N as written in the mode name; 0 = take the device's
  bool gc_opt = false;
  bool nr = false;

  static FtlMode no_wom() { return {}; }
  static FtlMode wom_v(unsigned k, unsigned n, bool gc_opt = false, bool nr = false) {
    return FtlMode{true, k, n, gc_opt, nr};
  }

  // Accepts e.g. "NO_WOM", "WOM-v(2,4)", "WOM-v(1,4)-GC_OPT", "WOM-v(2,4)-NR",
  // "WOM-v(2,4)-GC_OPT-NR". Case, '-'/'_' and spaces are not significant.
  static FtlMode parse(std::string_view text);
  std::string name() const;

  friend bool operator==(const FtlMode&, const FtlMode&) = default;
};

struct FtlConfig {
  FtlMode mode;
  double ecc_threshold = 0.03;
  double op_reserve = 0.11;
  std::uint32_t ring_capacity_pages = 256;
  std::uint64_t exposed_logical_pages = 0;  // 0 = default_exposed_pages()
  std::uint32_t logical_page_bytes = 4096;
  bool error_on_unmapped_read = false;
};

enum class PageState : std::uint8_t { Free, Valid, Invalidated, SkippedValid };

struct PageMeta {
  PageState state = PageState::Free;
  bool pinned = false;  // valid when its EU was reopened; skipped this pass
  std::uint8_t group_slot = 0;
  std::uint16_t nr_generation = 0;
  Lpa lpa = kUnmapped;
  std::uint32_t exhausted_cells = 0;
  std::uint32_t programs_since_erase = 0;
};

enum class EuState : std::uint8_t { Free, Active, Closed, ReopenedForGc };

struct EuMeta {
  EuState state = EuState::Free;
  bool fresh = true;  // erased and not reopened since: cells known to be zero
  std::uint32_t valid_pages = 0;
  std::uint32_t blocked_pages = 0;
  std::uint32_t pinned_pages = 0;
  std::uint32_t cursor = 0;  // next stripe slot while active
};

enum class GcAction : std::uint8_t { None, RelocateErase, RelocateReopen, ReopenInPlace };

struct FtlStats {
  std::uint64_t user_pages_written = 0;    // acknowledged writes
  std::uint64_t user_pages_committed = 0;  // of those, programmed to the device
  std::uint64_t user_bytes_written = 0;
  std::uint64_t logical_programs = 0;      // committed logical pages, user + relocation
  std::uint64_t device_page_programs = 0;
  std::uint64_t device_bytes_written = 0;
  std::uint64_t user_reads = 0;
  std::uint64_t user_read_page_ops = 0;
  std::uint64_t write_path_reads = 0;      // read-before-write charges
  std::uint64_t gc_reads = 0;
  std::uint64_t relocations = 0;           // logical pages copied by GC
  std::uint64_t eus_erased = 0;
  std::uint64_t eus_reopened = 0;
  std::uint64_t gc_steps = 0;
  std::uint64_t flushes = 0;
  std::uint64_t padding_slots = 0;
  std::uint64_t patched_cells = 0;

  std::uint64_t device_reads_charged() const noexcept {
    return user_read_page_ops + write_path_reads + gc_reads;
  }
};

// Staging area between the user-write path and the device.
class RingBuffer {
 public:
  RingBuffer(std::uint32_t capacity_pages, std::uint32_t page_bytes);

  std::uint32_t capacity() const noexcept { return capacity_; }
  std::uint32_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }
  bool full() const noexcept { return size_ == capacity_; }

  void push(Lpa lpa, std::span<const std::uint8_t> data);
  Lpa front_lpa() const;
  std::span<const std::uint8_t> front_data() const;
  void pop();

  // Newest staged copy of `lpa`, if one is waiting.
  std::optional<std::span<const std::uint8_t>> find_latest(Lpa lpa) const;

 private:
  std::uint32_t slot(std::uint64_t seq) const noexcept {
    return static_cast<std::uint32_t>(seq % capacity_);
  }

  std::uint32_t capacity_;
  std::uint32_t page_bytes_;
  std::uint32_t size_ = 0;
  std::uint64_t head_seq_ = 0;  // sequence number of the front entry
  std::vector<std::uint8_t> data_;
  std::vector<Lpa> lpas_;
  std::unordered_map<Lpa, std::uint64_t> latest_;
};

struct WriteAck {
  Micros completion = 0;
  bool flushed = false;
};

struct ReadOutcome {
  std::vector<std::uint8_t> data;
  Micros completion = 0;
  bool mapped = false;
};

// Over-provisioning reserve in EUs: ceil(op_reserve * EUs), at least 2.
std::uint32_t reserve_eus_for(const device::Geometry& geo, double op_reserve);
// Logical pages exposed when FtlConfig::exposed_logical_pages is 0.
std::uint64_t default_exposed_pages(const device::Geometry& geo, double op_reserve,
                                    std::uint32_t group_size);

class Ftl {
 public:
  Ftl(device::Device device, const FtlConfig& config);

  const FtlConfig& config() const noexcept { return config_; }
  const codec::CodeSpec& code() const noexcept { return code_; }
  const device::Device& device() const noexcept { return device_; }

  std::uint64_t exposed_logical_pages() const noexcept { return exposed_; }
  std::uint32_t group_size() const noexcept { return group_size_; }
  std::uint32_t reserve_eus() const noexcept { return reserve_eus_; }
  std::uint32_t ecc_threshold_cells() const noexcept { return threshold_cells_; }
  std::uint32_t patch_budget() const noexcept { return patch_budget_; }

  // Stages one logical page. Throws Error(AddressOutOfRange).
  WriteAck write(Lpa lpa, std::span<const std::uint8_t> data, Micros issue);
  // Commits everything staged; a partial stripe is padded to the PU count.
  Micros sync(Micros issue);

  ReadOutcome read(Lpa lpa, Micros issue);

  bool is_page_programmable(const PageMeta& page) const;
  // Throws Error(NoVictim) when no EU is closed.
  std::uint32_t select_victim() const;
  // One GC pass over the current victim; None if there is no closed EU.
  GcAction gc_step(Micros issue);

  const FtlStats& metrics_snapshot() const noexcept { return stats_; }

  // --- introspection -------------------------------------------------------
  const PageMeta& page_meta(const device::PageAddr& addr) const;
  PageState page_state(const device::PageAddr& addr) const;
  std::span<const codec::Patch> page_patches(const device::PageAddr& addr) const;
  const EuMeta& eu_meta(std::uint32_t eu) const { return eus_.at(eu); }
  // Physical pages of the lpa's group, empty if unmapped.
  std::vector<device::PageAddr> mapping(Lpa lpa) const;
  // Writable EU-equivalents waiting in the free pool.
  double free_eus() const noexcept {
    return static_cast<double>(pool_slots_) / device_.geometry().pages_per_eu();
  }
  std::uint32_t staged_pages() const noexcept { return ring_.size(); }
  std::size_t nr_metadata_bits() const { return codec::nr_metadata_bits(code_); }

  // Cross-checks L2P, page and EU bookkeeping; returns one line per violation.
  std::vector<std::string> audit() const;

 private:
  using Ppa = std::uint32_t;  // EU * pages_per_eu + stripe slot

  device::PageAddr addr_of(Ppa ppa) const noexcept;
  Ppa ppa_of(const device::PageAddr& addr) const noexcept;

  Micros flush(Micros issue);
  Micros commit(Lpa lpa, std::span<const std::uint8_t> data, bool relocation, Micros issue);
  Micros program_slot(Ppa ppa, Lpa lpa, std::uint32_t group_slot,
                      std::span<const std::uint8_t> data, Micros issue);
  Ppa next_slot();
  void activate_next();
  void close_active();
  void ensure_space(Micros issue);
  void invalidate_group(Lpa lpa);
  Micros read_group(Lpa lpa, Micros issue, std::span<std::uint8_t> out, bool for_gc);
  Micros relocate_valid(std::uint32_t eu, Micros issue);
  Micros erase(std::uint32_t eu, Micros issue);
  void reopen(std::uint32_t eu, bool pin_valid);
  std::optional<std::uint32_t> find_victim() const;
  bool blocked_after_program(const PageMeta& page) const;

  FtlConfig config_;
  device::Device device_;
  codec::CodeSpec code_;
  codec::PageCodec page_codec_;
  std::uint32_t group_size_;
  std::uint32_t pages_per_eu_;
  std::uint32_t reserve_eus_;
  std::uint32_t threshold_cells_;
  std::uint32_t patch_budget_;
  std::uint64_t exposed_;

  RingBuffer ring_;
  std::vector<Ppa> l2p_;  // exposed_ * group_size_
  std::vector<PageMeta> pages_;
  std::vector<std::vector<codec::Patch>> patches_;
  std::vector<EuMeta> eus_;
  std::deque<std::uint32_t> pool_;
  std::uint64_t pool_slots_ = 0;
  std::optional<std::uint32_t> active_;
  bool in_gc_ = false;

  std::vector<std::uint8_t> scratch_levels_;
  std::vector<std::uint8_t> scratch_out_;
  std::vector<std::uint8_t> scratch_page_;
  std::vector<codec::Patch> scratch_patches_;
  std::vector<std::uint32_t> scratch_skips_;

  FtlStats stats_;
};

}  // namespace womv::ftl
