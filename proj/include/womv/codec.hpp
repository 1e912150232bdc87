#pragma once

// Voltage-based write-once-memory codes, WOM-v(k,N).
//
// A cell with N bits has 2^N voltage levels. Data words of k bits are mapped
// onto generations: bands of 2^k consecutive levels where each band shares its
// top level with the bottom level of the next one. Generation g maps word d to
//
//     level(g, d) = g * (2^k - 1) + ((d + g) mod 2^k)
//
// so every level decodes as `level mod 2^k` regardless of generation, and an
// overwrite only ever needs to move a cell up to the nearest level with the
// right residue.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace womv::codec {

struct CellLevel {
  std::uint8_t value = 0;

  constexpr CellLevel() = default;
  constexpr explicit CellLevel(unsigned v) : value(static_cast<std::uint8_t>(v)) {}

  friend constexpr auto operator<=>(CellLevel, CellLevel) = default;
};

using DataWord = std::uint8_t;

// nullopt: the word is unreachable from the current level without an erase.
using EncodeOutcome = std::optional<CellLevel>;

class CodeSpec {
 public:
  unsigned data_bits() const noexcept { return k_; }
  unsigned cell_bits() const noexcept { return n_; }
  unsigned num_words() const noexcept { return 1u << k_; }
  unsigned num_levels() const noexcept { return 1u << n_; }
  unsigned generation_span() const noexcept { return (1u << k_) - 1; }
  unsigned generations() const noexcept { return generations_; }
  unsigned max_level() const noexcept { return generations_ * generation_span(); }

  // Physical pages needed per logical page when cells map one-to-one.
  unsigned expansion() const noexcept { return n_ / k_; }

  friend bool operator==(const CodeSpec&, const CodeSpec&) = default;

 private:
  friend CodeSpec build_code(unsigned k, unsigned n);
  CodeSpec(unsigned k, unsigned n);

  unsigned k_;
  unsigned n_;
  unsigned generations_;
};

// Throws Error(ParameterOutOfRange) unless 1 <= k <= n <= 8.
CodeSpec build_code(unsigned k, unsigned n);

CellLevel level_of(const CodeSpec& spec, unsigned generation, DataWord word);
DataWord decode_level(const CodeSpec& spec, CellLevel level);

// Smallest generation containing `level`; shared boundaries report the lower one.
unsigned canonical_generation(const CodeSpec& spec, CellLevel level);

// Minimal level >= current that decodes to `word`. Rewriting the word a cell
// already holds returns `current` unchanged.
EncodeOutcome encode_next(const CodeSpec& spec, CellLevel current, DataWord word);

// No-read programming: the page's generation counter picks the band directly.
// Throws Error(PageNotProgrammable) once generation >= G.
CellLevel encode_at_generation(const CodeSpec& spec, unsigned generation, DataWord word);

// True iff the cell sits strictly inside the last generation. A cell on the
// last shared base can still take any word.
bool is_exhausted(const CodeSpec& spec, CellLevel level);

// Bits of per-page metadata needed to store an NR generation counter 0..G.
unsigned nr_metadata_bits(const CodeSpec& spec);

// ---------------------------------------------------------------------------
// Page packing. A logical page is read as a little-endian bit stream cut into
// k-bit words; consecutive runs of `cells_per_block` words form the blocks that
// land on individual physical pages.

struct PackedPage {
  std::vector<std::vector<DataWord>> blocks;
};

// cells_per_block == 0 means (8 * logical.size()) / N, i.e. physical pages of
// the same byte size as the logical page. Throws Error(ParameterOutOfRange)
// when the expansion is not integral.
PackedPage pack_page(const CodeSpec& spec, std::span<const std::uint8_t> logical,
                     std::size_t cells_per_block = 0);
std::vector<std::uint8_t> unpack_page(const CodeSpec& spec, const PackedPage& packed);

// ---------------------------------------------------------------------------
// Byte-table codec over packed cell storage (N bits per cell, 8/N cells per
// byte). This is the hot path used by the FTL; it is built from the scalar
// functions above and tested against them.

struct Patch {
  std::uint32_t cell;
  DataWord word;

  friend bool operator==(const Patch&, const Patch&) = default;
};

class PageCodec {
 public:
  // Requires N in {1,2,4,8} and N % k == 0.
  explicit PageCodec(const CodeSpec& spec);

  const CodeSpec& spec() const noexcept { return spec_; }
  unsigned cells_per_byte() const noexcept { return cells_per_byte_; }
  // Data bits carried by one packed level byte.
  unsigned chunk_bits() const noexcept { return chunk_bits_; }

  // Read-before-write encode of block `block` of `logical` on top of `current`.
  // Cells whose target is unreachable keep their level and are appended to
  // `patches`. Returns the number of exhausted cells in `out`.
  std::uint32_t encode_block(std::span<const std::uint8_t> current,
                             std::span<const std::uint8_t> logical, std::size_t block,
                             std::span<std::uint8_t> out, std::vector<Patch>& patches) const;

  // Every cell of the block programmed into `generation`.
  void encode_block_at_generation(unsigned generation, std::span<const std::uint8_t> logical,
                                  std::size_t block, std::span<std::uint8_t> out) const;

  // Decodes a block into its slice of `logical` and overlays ECC patches.
  void decode_block(std::span<const std::uint8_t> levels, std::span<const Patch> patches,
                    std::size_t block, std::span<std::uint8_t> logical) const;

  std::uint32_t count_exhausted(std::span<const std::uint8_t> levels) const;

 private:
  std::uint8_t chunk_at(std::span<const std::uint8_t> logical, std::size_t index) const noexcept {
    return static_cast<std::uint8_t>((logical[index >> chunks_per_byte_log2_] >>
                                      ((index & chunk_index_mask_) * chunk_bits_)) &
                                     chunk_mask_);
  }

  CodeSpec spec_;
  unsigned cells_per_byte_;
  unsigned chunk_bits_;
  unsigned chunk_mask_;
  unsigned chunks_per_byte_log2_;
  std::size_t chunk_index_mask_;
  // encode_[cur * chunks + chunk] = new byte | (skip mask << 8)
  std::vector<std::uint16_t> encode_;
  std::vector<std::uint8_t> by_generation_;  // [g * chunks + chunk]
  std::array<std::uint8_t, 256> decode_{};
  std::array<std::uint8_t, 256> exhausted_{};
};

}  // namespace womv::codec
