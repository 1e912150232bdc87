#include "womv/codec.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "womv/error.hpp"

namespace womv::codec {

namespace {

[[noreturn]] void out_of_range(const std::string& what) {
  throw Error(ErrorCode::ParameterOutOfRange, what);
}

void check_level(const CodeSpec& spec, CellLevel level) {
  if (level.value > spec.max_level()) {
    out_of_range("level " + std::to_string(level.value) + " above max level " +
                 std::to_string(spec.max_level()));
  }
}

}  // namespace

CodeSpec::CodeSpec(unsigned k, unsigned n)
    : k_(k), n_(n), generations_(((1u << n) - 1) / ((1u << k) - 1)) {}

CodeSpec build_code(unsigned k, unsigned n) {
  if (k < 1 || n > 8 || k > n) {
    out_of_range("WOM-v(" + std::to_string(k) + "," + std::to_string(n) +
                 ") needs 1 <= k <= N <= 8");
  }
  return CodeSpec(k, n);
}

CellLevel level_of(const CodeSpec& spec, unsigned generation, DataWord word) {
  if (generation >= spec.generations()) {
    out_of_range("generation " + std::to_string(generation) + " >= G=" +
                 std::to_string(spec.generations()));
  }
  if (word >= spec.num_words()) {
    out_of_range("data word " + std::to_string(word) + " wider than k bits");
  }
  const unsigned words = spec.num_words();
  return CellLevel(generation * spec.generation_span() + ((word + generation) % words));
}

DataWord decode_level(const CodeSpec& spec, CellLevel level) {
  check_level(spec, level);
  return static_cast<DataWord>(level.value & (spec.num_words() - 1));
}

unsigned canonical_generation(const CodeSpec& spec, CellLevel level) {
  check_level(spec, level);
  if (level.value <= spec.generation_span()) return 0;
  return (level.value - 1u) / spec.generation_span();
}

EncodeOutcome encode_next(const CodeSpec& spec, CellLevel current, DataWord word) {
  check_level(spec, current);
  if (word >= spec.num_words()) {
    out_of_range("data word " + std::to_string(word) + " wider than k bits");
  }
  const unsigned mask = spec.num_words() - 1;
  const unsigned delta = (word - current.value) & mask;
  const unsigned next = current.value + delta;
  if (next > spec.max_level()) return std::nullopt;
  return CellLevel(next);
}

CellLevel encode_at_generation(const CodeSpec& spec, unsigned generation, DataWord word) {
  if (generation >= spec.generations()) {
    throw Error(ErrorCode::PageNotProgrammable,
                "NR generation " + std::to_string(generation) + " exhausted (G=" +
                    std::to_string(spec.generations()) + ")");
  }
  return level_of(spec, generation, word);
}

bool is_exhausted(const CodeSpec& spec, CellLevel level) {
  check_level(spec, level);
  return level.value > (spec.generations() - 1) * spec.generation_span();
}

unsigned nr_metadata_bits(const CodeSpec& spec) {
  return static_cast<unsigned>(std::bit_width(spec.generations()));
}

// ---------------------------------------------------------------------------

PackedPage pack_page(const CodeSpec& spec, std::span<const std::uint8_t> logical,
                     std::size_t cells_per_block) {
  const unsigned k = spec.data_bits();
  const unsigned n = spec.cell_bits();
  if (n % k != 0) {
    out_of_range("page mapping needs N % k == 0 (WOM-v(" + std::to_string(k) + "," +
                 std::to_string(n) + ") is codec-only)");
  }
  const std::size_t total_bits = logical.size() * 8;
  if (logical.empty() || total_bits % k != 0) out_of_range("logical page length");
  const std::size_t total_words = total_bits / k;
  if (cells_per_block == 0) cells_per_block = total_bits / n;
  if (cells_per_block == 0 || total_words % cells_per_block != 0) {
    out_of_range("logical page does not split into whole physical pages");
  }

  PackedPage packed;
  packed.blocks.assign(total_words / cells_per_block, std::vector<DataWord>(cells_per_block));
  const unsigned mask = (1u << k) - 1;
  for (std::size_t w = 0; w < total_words; ++w) {
    const std::size_t bit = w * k;
    // k <= 8 so a word spans at most two bytes.
    unsigned v = logical[bit / 8] >> (bit % 8);
    if (bit % 8 + k > 8) v |= static_cast<unsigned>(logical[bit / 8 + 1]) << (8 - bit % 8);
    packed.blocks[w / cells_per_block][w % cells_per_block] = static_cast<DataWord>(v & mask);
  }
  return packed;
}

std::vector<std::uint8_t> unpack_page(const CodeSpec& spec, const PackedPage& packed) {
  const unsigned k = spec.data_bits();
  std::size_t total_words = 0;
  for (const auto& block : packed.blocks) total_words += block.size();
  if (total_words * k % 8 != 0) out_of_range("packed words do not fill whole bytes");

  std::vector<std::uint8_t> logical(total_words * k / 8, 0);
  std::size_t w = 0;
  for (const auto& block : packed.blocks) {
    for (DataWord word : block) {
      const std::size_t bit = w * k;
      const unsigned v = static_cast<unsigned>(word) << (bit % 8);
      logical[bit / 8] |= static_cast<std::uint8_t>(v);
      if (bit % 8 + k > 8) logical[bit / 8 + 1] |= static_cast<std::uint8_t>(v >> 8);
      ++w;
    }
  }
  return logical;
}

// ---------------------------------------------------------------------------

PageCodec::PageCodec(const CodeSpec& spec) : spec_(spec) {
  const unsigned n = spec.cell_bits();
  const unsigned k = spec.data_bits();
  if (8 % n != 0) out_of_range("packed cell storage needs N in {1,2,4,8}");
  if (n % k != 0) out_of_range("page mapping needs N % k == 0");

  cells_per_byte_ = 8 / n;
  chunk_bits_ = cells_per_byte_ * k;
  chunk_mask_ = (1u << chunk_bits_) - 1;
  chunks_per_byte_log2_ = static_cast<unsigned>(std::countr_zero(8u / chunk_bits_));
  chunk_index_mask_ = (8u / chunk_bits_) - 1;

  const unsigned chunks = 1u << chunk_bits_;
  const unsigned level_mask = (1u << n) - 1;
  const unsigned word_mask = (1u << k) - 1;

  encode_.resize(256u * chunks);
  for (unsigned cur = 0; cur < 256; ++cur) {
    for (unsigned chunk = 0; chunk < chunks; ++chunk) {
      unsigned out = 0;
      unsigned skip = 0;
      for (unsigned i = 0; i < cells_per_byte_; ++i) {
        const CellLevel level((cur >> (i * n)) & level_mask);
        const auto word = static_cast<DataWord>((chunk >> (i * k)) & word_mask);
        const EncodeOutcome next = encode_next(spec, level, word);
        if (next) {
          out |= static_cast<unsigned>(next->value) << (i * n);
        } else {
          out |= static_cast<unsigned>(level.value) << (i * n);
          skip |= 1u << i;
        }
      }
      encode_[(cur << chunk_bits_) | chunk] = static_cast<std::uint16_t>(out | (skip << 8));
    }
  }

  by_generation_.resize(static_cast<std::size_t>(spec.generations()) * chunks);
  for (unsigned g = 0; g < spec.generations(); ++g) {
    for (unsigned chunk = 0; chunk < chunks; ++chunk) {
      unsigned out = 0;
      for (unsigned i = 0; i < cells_per_byte_; ++i) {
        const auto word = static_cast<DataWord>((chunk >> (i * k)) & word_mask);
        out |= static_cast<unsigned>(level_of(spec, g, word).value) << (i * n);
      }
      by_generation_[g * chunks + chunk] = static_cast<std::uint8_t>(out);
    }
  }

  for (unsigned byte = 0; byte < 256; ++byte) {
    unsigned data = 0;
    unsigned exhausted = 0;
    for (unsigned i = 0; i < cells_per_byte_; ++i) {
      const CellLevel level((byte >> (i * n)) & level_mask);
      data |= static_cast<unsigned>(decode_level(spec, level)) << (i * k);
      exhausted += is_exhausted(spec, level) ? 1 : 0;
    }
    decode_[byte] = static_cast<std::uint8_t>(data);
    exhausted_[byte] = static_cast<std::uint8_t>(exhausted);
  }
}

namespace {

// Chunk width as a template parameter lets the compiler unroll the inner
// loop; this is the hottest loop of a simulation.
template <unsigned ChunkBits>
std::uint32_t encode_loop(const std::uint8_t* current, const std::uint8_t* logical,
                          std::size_t page_bytes, std::uint8_t* out, const std::uint16_t* encode,
                          const std::uint8_t* exhausted_table, unsigned cells_per_byte,
                          unsigned k, unsigned word_mask, std::vector<Patch>& patches) {
  constexpr unsigned kPerByte = 8 / ChunkBits;
  constexpr unsigned kMask = (1u << ChunkBits) - 1;
  std::uint32_t exhausted = 0;
  for (std::size_t lb = 0; lb < page_bytes / kPerByte; ++lb) {
    const unsigned src = logical[lb];
#pragma GCC unroll 8
    for (unsigned j = 0; j < kPerByte; ++j) {
      const std::size_t b = lb * kPerByte + j;
      const unsigned chunk = (src >> (j * ChunkBits)) & kMask;
      const std::uint16_t e = encode[(static_cast<unsigned>(current[b]) << ChunkBits) | chunk];
      const auto level_byte = static_cast<std::uint8_t>(e);
      out[b] = level_byte;
      exhausted += exhausted_table[level_byte];
      if (e >> 8) [[unlikely]] {
        for (unsigned skip = e >> 8; skip != 0; skip &= skip - 1) {
          const auto i = static_cast<unsigned>(std::countr_zero(skip));
          patches.push_back(Patch{static_cast<std::uint32_t>(b * cells_per_byte + i),
                                  static_cast<DataWord>((chunk >> (i * k)) & word_mask)});
        }
      }
    }
  }
  return exhausted;
}

}  // namespace

std::uint32_t PageCodec::encode_block(std::span<const std::uint8_t> current,
                                      std::span<const std::uint8_t> logical, std::size_t block,
                                      std::span<std::uint8_t> out,
                                      std::vector<Patch>& patches) const {
  const std::size_t page_bytes = out.size();
  const std::size_t base = block * page_bytes;
  const unsigned k = spec_.data_bits();
  const unsigned word_mask = spec_.num_words() - 1;
  if (chunk_bits_ <= 8 && (base & chunk_index_mask_) == 0 &&
      (page_bytes & chunk_index_mask_) == 0) {
    const std::uint8_t* src = logical.data() + (base >> chunks_per_byte_log2_);
    switch (chunk_bits_) {
      case 1:
        return encode_loop<1>(current.data(), src, page_bytes, out.data(), encode_.data(),
                              exhausted_.data(), cells_per_byte_, k, word_mask, patches);
      case 2:
        return encode_loop<2>(current.data(), src, page_bytes, out.data(), encode_.data(),
                              exhausted_.data(), cells_per_byte_, k, word_mask, patches);
      case 4:
        return encode_loop<4>(current.data(), src, page_bytes, out.data(), encode_.data(),
                              exhausted_.data(), cells_per_byte_, k, word_mask, patches);
      case 8:
        return encode_loop<8>(current.data(), src, page_bytes, out.data(), encode_.data(),
                              exhausted_.data(), cells_per_byte_, k, word_mask, patches);
      default:
        break;
    }
  }
  std::uint32_t exhausted = 0;
  for (std::size_t b = 0; b < page_bytes; ++b) {
    const unsigned chunk = chunk_at(logical, base + b);
    const std::uint16_t e = encode_[(static_cast<unsigned>(current[b]) << chunk_bits_) | chunk];
    const auto level_byte = static_cast<std::uint8_t>(e);
    out[b] = level_byte;
    exhausted += exhausted_[level_byte];
    if (e >> 8) [[unlikely]] {
      for (unsigned skip = e >> 8; skip != 0; skip &= skip - 1) {
        const auto i = static_cast<unsigned>(std::countr_zero(skip));
        patches.push_back(Patch{static_cast<std::uint32_t>(b * cells_per_byte_ + i),
                                static_cast<DataWord>((chunk >> (i * k)) & word_mask)});
      }
    }
  }
  return exhausted;
}

void PageCodec::encode_block_at_generation(unsigned generation,
                                           std::span<const std::uint8_t> logical,
                                           std::size_t block,
                                           std::span<std::uint8_t> out) const {
  if (generation >= spec_.generations()) {
    throw Error(ErrorCode::PageNotProgrammable,
                "NR generation " + std::to_string(generation) + " exhausted");
  }
  const std::uint8_t* table = by_generation_.data() + (static_cast<std::size_t>(generation)
                                                       << chunk_bits_);
  const std::size_t page_bytes = out.size();
  const std::size_t base = block * page_bytes;
  for (std::size_t b = 0; b < page_bytes; ++b) out[b] = table[chunk_at(logical, base + b)];
}

void PageCodec::decode_block(std::span<const std::uint8_t> levels,
                             std::span<const Patch> patches, std::size_t block,
                             std::span<std::uint8_t> logical) const {
  const std::size_t page_bytes = levels.size();
  const std::size_t base = block * page_bytes;
  const std::size_t first_byte = base >> chunks_per_byte_log2_;
  const std::size_t byte_count = page_bytes >> chunks_per_byte_log2_;
  std::fill_n(logical.begin() + static_cast<std::ptrdiff_t>(first_byte), byte_count, 0);
  for (std::size_t b = 0; b < page_bytes; ++b) {
    const std::size_t index = base + b;
    logical[index >> chunks_per_byte_log2_] |= static_cast<std::uint8_t>(
        decode_[levels[b]] << ((index & chunk_index_mask_) * chunk_bits_));
  }

  // Patched cells: the ECC erasure-corrects them back to the intended word.
  const unsigned k = spec_.data_bits();
  const std::size_t cells_per_page = page_bytes * cells_per_byte_;
  const unsigned word_mask = spec_.num_words() - 1;
  for (const Patch& p : patches) {
    const std::size_t bit = (block * cells_per_page + p.cell) * k;
    std::uint8_t& byte = logical[bit / 8];
    const unsigned shift = bit % 8;
    byte = static_cast<std::uint8_t>((byte & ~(word_mask << shift)) | (p.word << shift));
  }
}

std::uint32_t PageCodec::count_exhausted(std::span<const std::uint8_t> levels) const {
  std::uint32_t total = 0;
  for (std::uint8_t b : levels) total += exhausted_[b];
  return total;
}

}  // namespace womv::codec
