#include "womv/ftl.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>

#include "womv/error.hpp"

namespace womv::ftl {

using device::PageAddr;

namespace {

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::ConfigError, what);
}

std::string normalize(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c == ' ' || c == '\t') continue;
    out.push_back(c == '_' ? '-' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  return out;
}

codec::CodeSpec make_code(const FtlMode& mode, const device::Geometry& geometry) {
  const unsigned n = geometry.bits_per_cell;
  if (!mode.wom) return codec::build_code(n, n);
  if (mode.cell_bits != 0 && mode.cell_bits != n) {
    config_error(mode.name() + " does not match a device with " + std::to_string(n) +
                 " bits per cell");
  }
  return codec::build_code(mode.data_bits, n);
}

}  // namespace

// ---------------------------------------------------------------------------
// FtlMode

FtlMode FtlMode::parse(std::string_view text) {
  const std::string s = normalize(text);
  if (s == "NO-WOM" || s == "NOWOM") return no_wom();

  std::size_t pos;
  if (s.rfind("WOM-V(", 0) == 0) {
    pos = 6;
  } else if (s.rfind("WOMV(", 0) == 0) {
    pos = 5;
  } else {
    config_error("unknown mode '" + std::string(text) + "'");
  }
  const std::size_t comma = s.find(',', pos);
  const std::size_t close = s.find(')', pos);
  if (comma == std::string::npos || close == std::string::npos || comma > close) {
    config_error("mode '" + std::string(text) + "' needs WOM-v(k,N)");
  }
  FtlMode mode;
  mode.wom = true;
  try {
    mode.data_bits = static_cast<unsigned>(std::stoul(s.substr(pos, comma - pos)));
    mode.cell_bits = static_cast<unsigned>(std::stoul(s.substr(comma + 1, close - comma - 1)));
  } catch (const std::exception&) {
    config_error("mode '" + std::string(text) + "' has non-numeric code parameters");
  }

  std::string suffix;
  for (char c : s.substr(close + 1)) {
    if (c != '-') suffix.push_back(c);
  }
  if (suffix == "GCOPT") {
    mode.gc_opt = true;
  } else if (suffix == "NR") {
    mode.nr = true;
  } else if (suffix == "GCOPTNR" || suffix == "NRGCOPT") {
    mode.gc_opt = mode.nr = true;
  } else if (!suffix.empty()) {
    config_error("unknown mode suffix in '" + std::string(text) + "'");
  }
  return mode;
}

std::string FtlMode::name() const {
  if (!wom) return "NO_WOM";
  std::string s = "WOM-v(" + std::to_string(data_bits) + "," +
                  (cell_bits == 0 ? std::string("N") : std::to_string(cell_bits)) + ")";
  if (gc_opt) s += "-GC_OPT";
  if (nr) s += "-NR";
  return s;
}

// ---------------------------------------------------------------------------
// RingBuffer

RingBuffer::RingBuffer(std::uint32_t capacity_pages, std::uint32_t page_bytes)
    : capacity_(capacity_pages), page_bytes_(page_bytes) {
  if (capacity_ == 0) config_error("ring buffer capacity must be >= 1");
  data_.resize(static_cast<std::size_t>(capacity_) * page_bytes_);
  lpas_.resize(capacity_);
}

void RingBuffer::push(Lpa lpa, std::span<const std::uint8_t> data) {
  if (full()) throw Error(ErrorCode::DeviceFull, "ring buffer full");
  const std::uint64_t seq = head_seq_ + size_;
  const std::uint32_t s = slot(seq);
  std::memcpy(data_.data() + static_cast<std::size_t>(s) * page_bytes_, data.data(),
              page_bytes_);
  lpas_[s] = lpa;
  latest_[lpa] = seq;
  ++size_;
}

Lpa RingBuffer::front_lpa() const { return lpas_[slot(head_seq_)]; }

std::span<const std::uint8_t> RingBuffer::front_data() const {
  return {data_.data() + static_cast<std::size_t>(slot(head_seq_)) * page_bytes_, page_bytes_};
}

void RingBuffer::pop() {
  if (empty()) return;
  const Lpa lpa = front_lpa();
  if (auto it = latest_.find(lpa); it != latest_.end() && it->second == head_seq_) {
    latest_.erase(it);
  }
  ++head_seq_;
  --size_;
}

std::optional<std::span<const std::uint8_t>> RingBuffer::find_latest(Lpa lpa) const {
  const auto it = latest_.find(lpa);
  if (it == latest_.end()) return std::nullopt;
  return std::span<const std::uint8_t>(
      data_.data() + static_cast<std::size_t>(slot(it->second)) * page_bytes_, page_bytes_);
}

// ---------------------------------------------------------------------------
// Ftl

std::uint32_t reserve_eus_for(const device::Geometry& geo, double op_reserve) {
  return std::max<std::uint32_t>(
      2, static_cast<std::uint32_t>(std::ceil(op_reserve * geo.num_eus() - 1e-9)));
}

std::uint64_t default_exposed_pages(const device::Geometry& geo, double op_reserve,
                                    std::uint32_t group_size) {
  // Besides the reserve and the active EU, leave as much again for invalid
  // data so collection always has something to reclaim.
  const std::uint32_t reserve = reserve_eus_for(geo, op_reserve);
  if (geo.num_eus() <= reserve + 1) return 0;
  const std::uint32_t held_back = std::min(geo.num_eus() - 1, 2 * reserve + 2);
  return std::uint64_t{geo.num_eus() - held_back} * geo.pages_per_eu() / group_size;
}

Ftl::Ftl(device::Device device, const FtlConfig& config)
    : config_(config),
      device_(std::move(device)),
      code_(make_code(config.mode, device_.geometry())),
      page_codec_(code_),
      ring_(config.ring_capacity_pages, config.logical_page_bytes) {
  const device::Geometry& geo = device_.geometry();
  if (!(config_.ecc_threshold >= 0.0 && config_.ecc_threshold < 1.0)) {
    config_error("ecc_threshold must be in [0, 1)");
  }
  if (!(config_.op_reserve >= 0.0 && config_.op_reserve < 1.0)) {
    config_error("op_reserve must be in [0, 1)");
  }
  if (config_.mode.wom) config_.mode.cell_bits = geo.bits_per_cell;

  const std::uint64_t logical_bits = std::uint64_t{config_.logical_page_bytes} * 8;
  const std::uint64_t bits_per_page = std::uint64_t{code_.data_bits()} * geo.cells_per_page();
  if (logical_bits == 0 || logical_bits % bits_per_page != 0) {
    config_error("a " + std::to_string(config_.logical_page_bytes) +
                 "-byte logical page does not fill whole physical pages under " +
                 config_.mode.name());
  }
  group_size_ = static_cast<std::uint32_t>(logical_bits / bits_per_page);
  if (group_size_ > 255) config_error("logical page expands to too many physical pages");

  pages_per_eu_ = geo.pages_per_eu();
  reserve_eus_ = reserve_eus_for(geo, config_.op_reserve);
  if (geo.num_eus() < reserve_eus_ + 2) {
    config_error("device has " + std::to_string(geo.num_eus()) + " EUs; needs at least " +
                 std::to_string(reserve_eus_ + 2) + " for a reserve of " +
                 std::to_string(reserve_eus_));
  }

  const double cells = geo.cells_per_page();
  threshold_cells_ = static_cast<std::uint32_t>(std::floor(config_.ecc_threshold * cells + 1e-9));
  patch_budget_ = static_cast<std::uint32_t>(std::ceil(config_.ecc_threshold * cells - 1e-9));

  const std::uint64_t max_exposed = geo.total_pages() / group_size_;
  exposed_ = config_.exposed_logical_pages == 0
                 ? default_exposed_pages(geo, config_.op_reserve, group_size_)
                 : config_.exposed_logical_pages;
  if (exposed_ > max_exposed) {
    config_error("exposed_logical_pages " + std::to_string(exposed_) + " exceeds " +
                 std::to_string(max_exposed) + " (physical pages * k / N)");
  }
  if (exposed_ == 0) config_error("device too small to expose a logical page");
  config_.exposed_logical_pages = exposed_;

  device_.set_level_ceiling(static_cast<std::uint8_t>(code_.max_level()));

  l2p_.assign(exposed_ * group_size_, kUnmapped);
  pages_.assign(geo.total_pages(), PageMeta{});
  patches_.resize(geo.total_pages());
  eus_.assign(geo.num_eus(), EuMeta{});
  for (std::uint32_t eu = 0; eu < geo.num_eus(); ++eu) pool_.push_back(eu);
  pool_slots_ = std::uint64_t{geo.num_eus()} * pages_per_eu_;

  scratch_levels_.resize(geo.page_size_bytes);
  scratch_out_.resize(geo.page_size_bytes);
  scratch_page_.resize(config_.logical_page_bytes);
}

PageAddr Ftl::addr_of(Ppa ppa) const noexcept {
  const std::uint32_t pus = device_.geometry().num_pus;
  const std::uint32_t slot = ppa % pages_per_eu_;
  return PageAddr{slot % pus, ppa / pages_per_eu_, slot / pus};
}

Ftl::Ppa Ftl::ppa_of(const PageAddr& addr) const noexcept {
  return addr.chunk * pages_per_eu_ + addr.page * device_.geometry().num_pus + addr.pu;
}

WriteAck Ftl::write(Lpa lpa, std::span<const std::uint8_t> data, Micros issue) {
  if (lpa >= exposed_) {
    throw Error(ErrorCode::AddressOutOfRange, "lpa " + std::to_string(lpa) +
                                                  " outside exposed space of " +
                                                  std::to_string(exposed_) + " pages");
  }
  if (data.size() != config_.logical_page_bytes) {
    throw Error(ErrorCode::ParameterOutOfRange, "write buffer is not one logical page");
  }
  ring_.push(lpa, data);
  ++stats_.user_pages_written;
  stats_.user_bytes_written += data.size();

  WriteAck ack{issue, false};
  if (ring_.full()) {
    ack.completion = flush(issue);
    ack.flushed = true;
  }
  return ack;
}

Micros Ftl::flush(Micros issue) {
  if (ring_.empty()) return issue;
  ++stats_.flushes;
  Micros done = issue;
  while (!ring_.empty()) {
    done = std::max(done, commit(ring_.front_lpa(), ring_.front_data(), false, issue));
    ++stats_.user_pages_committed;
    ring_.pop();
  }
  ensure_space(issue);
  return done;
}

Micros Ftl::sync(Micros issue) {
  const Micros done = flush(issue);
  if (active_) {
    const std::uint32_t pus = device_.geometry().num_pus;
    EuMeta& e = eus_[*active_];
    while (e.cursor < pages_per_eu_ && e.cursor % pus != 0) {
      if (!pages_[*active_ * pages_per_eu_ + e.cursor].pinned) ++stats_.padding_slots;
      ++e.cursor;
    }
    if (e.cursor >= pages_per_eu_) close_active();
  }
  return done;
}

Micros Ftl::commit(Lpa lpa, std::span<const std::uint8_t> data, bool relocation, Micros issue) {
  if (!relocation) ensure_space(issue);

  std::array<Ppa, 256> group{};
  for (std::uint32_t i = 0; i < group_size_; ++i) group[i] = next_slot();

  Micros done = issue;
  for (std::uint32_t i = 0; i < group_size_; ++i) {
    done = std::max(done, program_slot(group[i], lpa, i, data, issue));
  }
  invalidate_group(lpa);
  std::copy_n(group.begin(), group_size_, l2p_.begin() + static_cast<std::ptrdiff_t>(
                                                             std::uint64_t{lpa} * group_size_));
  ++stats_.logical_programs;
  return done;
}

Micros Ftl::program_slot(Ppa ppa, Lpa lpa, std::uint32_t group_slot,
                         std::span<const std::uint8_t> data, Micros issue) {
  PageMeta& page = pages_[ppa];
  const PageAddr addr = addr_of(ppa);
  const std::uint32_t eu = addr.chunk;
  if (page.state == PageState::Valid || page.pinned) {
    throw Error(ErrorCode::PageNotProgrammable, "slot holds valid data");
  }
  if (!is_page_programmable(page)) {
    throw Error(ErrorCode::PageNotProgrammable,
                "page " + std::to_string(ppa) + " selected past its ECC threshold");
  }

  Micros start = issue;
  scratch_patches_.clear();
  if (!config_.mode.wom) {
    page_codec_.encode_block_at_generation(0, data, group_slot, scratch_out_);
  } else if (config_.mode.nr) {
    page_codec_.encode_block_at_generation(page.nr_generation, data, group_slot, scratch_out_);
    ++page.nr_generation;
  } else {
    std::span<const std::uint8_t> current;
    if (eus_[eu].fresh) {
      current = device_.peek(addr);
    } else {
      start = device_.read_page_into(addr, issue, scratch_levels_);
      ++stats_.write_path_reads;
      current = scratch_levels_;
    }
    page.exhausted_cells =
        page_codec_.encode_block(current, data, group_slot, scratch_out_, scratch_patches_);
  }

  scratch_skips_.clear();
  for (const codec::Patch& p : scratch_patches_) scratch_skips_.push_back(p.cell);
  const device::ProgramReport report =
      device_.program_page(addr, scratch_out_, scratch_skips_, start);

  page.state = PageState::Valid;
  page.lpa = lpa;
  page.group_slot = static_cast<std::uint8_t>(group_slot);
  ++page.programs_since_erase;
  patches_[ppa].assign(scratch_patches_.begin(), scratch_patches_.end());
  stats_.patched_cells += scratch_patches_.size();

  EuMeta& e = eus_[eu];
  ++e.valid_pages;
  if (blocked_after_program(page)) ++e.blocked_pages;

  ++stats_.device_page_programs;
  stats_.device_bytes_written += device_.geometry().page_size_bytes;
  return report.completion;
}

bool Ftl::is_page_programmable(const PageMeta& page) const {
  if (!config_.mode.wom) return page.state == PageState::Free;
  if (config_.mode.nr) return page.nr_generation < code_.generations();
  return page.exhausted_cells <= threshold_cells_;
}

bool Ftl::blocked_after_program(const PageMeta& page) const {
  if (!config_.mode.wom) return false;
  return !is_page_programmable(page);
}

Ftl::Ppa Ftl::next_slot() {
  for (;;) {
    if (!active_) activate_next();
    EuMeta& e = eus_[*active_];
    const Ppa base = *active_ * pages_per_eu_;
    while (e.cursor < pages_per_eu_ && pages_[base + e.cursor].pinned) ++e.cursor;
    if (e.cursor >= pages_per_eu_) {
      close_active();
      continue;
    }
    const Ppa ppa = base + e.cursor++;
    while (e.cursor < pages_per_eu_ && pages_[base + e.cursor].pinned) ++e.cursor;
    if (e.cursor >= pages_per_eu_) close_active();
    return ppa;
  }
}

void Ftl::activate_next() {
  if (pool_.empty()) {
    throw Error(ErrorCode::DeviceFull, "no writable EU left (exposed space too large for "
                                       "the device, or GC cannot reclaim)");
  }
  const std::uint32_t eu = pool_.front();
  pool_.pop_front();
  EuMeta& e = eus_[eu];
  pool_slots_ -= pages_per_eu_ - e.pinned_pages;
  e.state = EuState::Active;
  e.cursor = 0;
  active_ = eu;
}

void Ftl::close_active() {
  eus_[*active_].state = EuState::Closed;
  active_.reset();
}

void Ftl::ensure_space(Micros issue) {
  if (in_gc_) return;
  const std::uint64_t low = std::uint64_t{reserve_eus_} * pages_per_eu_;
  if (pool_slots_ >= low) return;
  in_gc_ = true;
  // Hysteresis: once triggered, collect until one EU above the reserve.
  while (pool_slots_ < low + pages_per_eu_) {
    // A fully valid victim would cost a whole EU of copies and free nothing.
    const auto victim = find_victim();
    if (!victim || eus_[*victim].valid_pages >= pages_per_eu_) break;
    gc_step(issue);
  }
  in_gc_ = false;
}

void Ftl::invalidate_group(Lpa lpa) {
  const std::uint64_t base = std::uint64_t{lpa} * group_size_;
  for (std::uint32_t i = 0; i < group_size_; ++i) {
    Ppa& ppa = l2p_[base + i];
    if (ppa == kUnmapped) continue;
    PageMeta& page = pages_[ppa];
    if (page.state == PageState::Valid) {
      page.state = PageState::Invalidated;
      --eus_[ppa / pages_per_eu_].valid_pages;
    }
    ppa = kUnmapped;
  }
}

Micros Ftl::read_group(Lpa lpa, Micros issue, std::span<std::uint8_t> out, bool for_gc) {
  const std::uint64_t base = std::uint64_t{lpa} * group_size_;
  Micros done = issue;
  for (std::uint32_t i = 0; i < group_size_; ++i) {
    const Ppa ppa = l2p_[base + i];
    done = std::max(done, device_.read_page_into(addr_of(ppa), issue, scratch_levels_));
    page_codec_.decode_block(scratch_levels_, patches_[ppa], i, out);
  }
  (for_gc ? stats_.gc_reads : stats_.user_read_page_ops) += group_size_;
  return done;
}

ReadOutcome Ftl::read(Lpa lpa, Micros issue) {
  if (lpa >= exposed_) {
    throw Error(ErrorCode::AddressOutOfRange, "lpa " + std::to_string(lpa) +
                                                  " outside exposed space of " +
                                                  std::to_string(exposed_) + " pages");
  }
  ++stats_.user_reads;
  ReadOutcome r;
  r.data.assign(config_.logical_page_bytes, 0);
  r.completion = issue;
  if (auto staged = ring_.find_latest(lpa)) {
    std::copy(staged->begin(), staged->end(), r.data.begin());
    r.mapped = true;
    return r;
  }
  if (l2p_[std::uint64_t{lpa} * group_size_] == kUnmapped) {
    if (config_.error_on_unmapped_read) {
      throw Error(ErrorCode::UnmappedRead, "lpa " + std::to_string(lpa) + " never written");
    }
    return r;
  }
  r.completion = read_group(lpa, issue, r.data, false);
  r.mapped = true;
  return r;
}

std::optional<std::uint32_t> Ftl::find_victim() const {
  std::optional<std::uint32_t> best;
  for (std::uint32_t eu = 0; eu < eus_.size(); ++eu) {
    if (eus_[eu].state != EuState::Closed) continue;
    if (!best || eus_[eu].valid_pages < eus_[*best].valid_pages) best = eu;
  }
  return best;
}

std::uint32_t Ftl::select_victim() const {
  const auto victim = find_victim();
  if (!victim) throw Error(ErrorCode::NoVictim, "no closed EU to collect");
  return *victim;
}

GcAction Ftl::gc_step(Micros issue) {
  const auto victim = find_victim();
  if (!victim) return GcAction::None;
  const std::uint32_t eu = *victim;
  ++stats_.gc_steps;

  const bool blocked = eus_[eu].blocked_pages > 0;
  if (config_.mode.wom && config_.mode.gc_opt && !blocked) {
    reopen(eu, true);
    return GcAction::ReopenInPlace;
  }
  const Micros relocated = relocate_valid(eu, issue);
  if (!config_.mode.wom || blocked) {
    erase(eu, relocated);
    return GcAction::RelocateErase;
  }
  reopen(eu, false);
  return GcAction::RelocateReopen;
}

Micros Ftl::relocate_valid(std::uint32_t eu, Micros issue) {
  const Ppa base = eu * pages_per_eu_;
  Micros done = issue;
  for (std::uint32_t slot = 0; slot < pages_per_eu_; ++slot) {
    const PageMeta& page = pages_[base + slot];
    if (page.state != PageState::Valid) continue;
    const Lpa lpa = page.lpa;
    if (ring_.find_latest(lpa)) {
      // A newer copy is staged; the old group only needs to go away.
      invalidate_group(lpa);
      continue;
    }
    const Micros read_done = read_group(lpa, issue, scratch_page_, true);
    done = std::max(done, commit(lpa, scratch_page_, true, read_done));
    ++stats_.relocations;
  }
  return done;
}

Micros Ftl::erase(std::uint32_t eu, Micros issue) {
  EuMeta& e = eus_[eu];
  if (e.valid_pages != 0) {
    throw Error(ErrorCode::PageNotProgrammable,
                "erasing EU " + std::to_string(eu) + " with valid pages");
  }
  const Micros done = device_.erase_eu(eu, issue);
  const Ppa base = eu * pages_per_eu_;
  for (std::uint32_t slot = 0; slot < pages_per_eu_; ++slot) {
    pages_[base + slot] = PageMeta{};
    patches_[base + slot].clear();
  }
  e = EuMeta{};
  pool_.push_back(eu);
  pool_slots_ += pages_per_eu_;
  ++stats_.eus_erased;
  return done;
}

void Ftl::reopen(std::uint32_t eu, bool pin_valid) {
  device_.reopen_chunk_cycle(eu);
  EuMeta& e = eus_[eu];
  const Ppa base = eu * pages_per_eu_;
  std::uint32_t pinned = 0;
  for (std::uint32_t slot = 0; slot < pages_per_eu_; ++slot) {
    PageMeta& page = pages_[base + slot];
    page.pinned = pin_valid && page.state == PageState::Valid;
    pinned += page.pinned ? 1 : 0;
  }
  e.state = EuState::ReopenedForGc;
  e.fresh = false;
  e.cursor = 0;
  e.pinned_pages = pinned;
  pool_.push_back(eu);
  pool_slots_ += pages_per_eu_ - pinned;
  ++stats_.eus_reopened;
}

// ---------------------------------------------------------------------------
// Introspection

const PageMeta& Ftl::page_meta(const PageAddr& addr) const {
  device_.peek(addr);  // bounds check
  return pages_[ppa_of(addr)];
}

PageState Ftl::page_state(const PageAddr& addr) const {
  const PageMeta& page = page_meta(addr);
  if (page.state == PageState::Valid && page.pinned) return PageState::SkippedValid;
  return page.state;
}

std::span<const codec::Patch> Ftl::page_patches(const PageAddr& addr) const {
  device_.peek(addr);
  return patches_[ppa_of(addr)];
}

std::vector<PageAddr> Ftl::mapping(Lpa lpa) const {
  std::vector<PageAddr> out;
  if (lpa >= exposed_) return out;
  const std::uint64_t base = std::uint64_t{lpa} * group_size_;
  if (l2p_[base] == kUnmapped) return out;
  for (std::uint32_t i = 0; i < group_size_; ++i) out.push_back(addr_of(l2p_[base + i]));
  return out;
}

std::vector<std::string> Ftl::audit() const {
  std::vector<std::string> problems;
  auto fail = [&](std::string msg) {
    if (problems.size() < 32) problems.push_back(std::move(msg));
  };

  std::vector<std::uint32_t> referenced(pages_.size(), 0);
  std::uint64_t mapped_pages = 0;
  for (Lpa lpa = 0; lpa < exposed_; ++lpa) {
    const std::uint64_t base = std::uint64_t{lpa} * group_size_;
    const bool mapped = l2p_[base] != kUnmapped;
    for (std::uint32_t i = 0; i < group_size_; ++i) {
      const Ppa ppa = l2p_[base + i];
      if ((ppa != kUnmapped) != mapped) {
        fail("lpa " + std::to_string(lpa) + " partially mapped");
        continue;
      }
      if (!mapped) continue;
      ++mapped_pages;
      ++referenced[ppa];
      const PageMeta& page = pages_[ppa];
      if (page.state != PageState::Valid || page.lpa != lpa || page.group_slot != i) {
        fail("lpa " + std::to_string(lpa) + " maps to page " + std::to_string(ppa) +
             " that does not hold it");
      }
    }
  }

  std::vector<std::uint32_t> valid(eus_.size(), 0);
  std::vector<std::uint32_t> blocked(eus_.size(), 0);
  for (Ppa ppa = 0; ppa < pages_.size(); ++ppa) {
    const PageMeta& page = pages_[ppa];
    const std::uint32_t eu = ppa / pages_per_eu_;
    if (page.state == PageState::Valid) {
      ++valid[eu];
      if (referenced[ppa] != 1) {
        fail("valid page " + std::to_string(ppa) + " referenced " +
             std::to_string(referenced[ppa]) + " times");
      }
    }
    if (config_.mode.wom && page.programs_since_erase > 0 && !is_page_programmable(page)) {
      ++blocked[eu];
    }
    if (patches_[ppa].size() > patch_budget_) {
      fail("page " + std::to_string(ppa) + " carries " + std::to_string(patches_[ppa].size()) +
           " patches, budget " + std::to_string(patch_budget_));
    }
    if (config_.mode.nr && (!patches_[ppa].empty() || page.nr_generation > code_.generations())) {
      fail("NR page " + std::to_string(ppa) + " has patches or generation overflow");
    }
  }
  for (std::uint32_t eu = 0; eu < eus_.size(); ++eu) {
    if (valid[eu] != eus_[eu].valid_pages) {
      fail("EU " + std::to_string(eu) + " valid count " + std::to_string(eus_[eu].valid_pages) +
           " != " + std::to_string(valid[eu]));
    }
    if (blocked[eu] != eus_[eu].blocked_pages) {
      fail("EU " + std::to_string(eu) + " blocked count mismatch");
    }
  }

  std::uint64_t slots = 0;
  for (std::uint32_t eu : pool_) slots += pages_per_eu_ - eus_[eu].pinned_pages;
  if (slots != pool_slots_) fail("free pool slot count drifted");
  std::uint32_t active = 0;
  for (const EuMeta& e : eus_) active += e.state == EuState::Active ? 1 : 0;
  if (active > 1) fail("more than one active EU");
  (void)mapped_pages;
  return problems;
}

}  // namespace womv::ftl
