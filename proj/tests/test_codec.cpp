#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "oracle.hpp"
#include "womv/codec.hpp"
#include "womv/error.hpp"

using namespace womv;
using namespace womv::codec;

namespace {

std::vector<std::uint8_t> random_bytes(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> v(n);
  for (auto& b : v) b = static_cast<std::uint8_t>(rng());
  return v;
}

}  // namespace

TEST(CodeSpec, GenerationCounts) {
  EXPECT_EQ(build_code(2, 4).generations(), 5u);
  EXPECT_EQ(build_code(2, 4).max_level(), 15u);
  EXPECT_EQ(build_code(3, 4).generations(), 2u);
  EXPECT_EQ(build_code(3, 4).max_level(), 14u);
  EXPECT_EQ(build_code(4, 4).generations(), 1u);
  EXPECT_EQ(build_code(1, 4).generations(), 15u);
  for (unsigned n = 1; n <= 8; ++n) {
    for (unsigned k = 1; k <= n; ++k) {
      EXPECT_EQ(build_code(k, n).generations(), oracle::chain_generations(k, n)) << k << "," << n;
      EXPECT_LE(build_code(k, n).max_level(), (1u << n) - 1);
    }
  }
}

TEST(CodeSpec, RejectsBadParameters) {
  EXPECT_THROW(build_code(0, 4), Error);
  EXPECT_THROW(build_code(5, 4), Error);
  EXPECT_THROW(build_code(2, 9), Error);
  try {
    build_code(5, 4);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParameterOutOfRange);
  }
}

TEST(Codec, LevelOfExamples) {
  const CodeSpec k3 = build_code(3, 4);
  EXPECT_EQ(level_of(k3, 0, 5).value, 5);
  EXPECT_EQ(level_of(k3, 1, 1).value, 9);
  EXPECT_EQ(level_of(k3, 1, 7).value, 7);
  EXPECT_EQ(level_of(build_code(2, 4), 1, 0).value, 4);
  EXPECT_THROW(level_of(k3, 2, 0), Error);
  EXPECT_THROW(level_of(k3, 0, 8), Error);
}

TEST(Codec, DecodeExamples) {
  const CodeSpec k3 = build_code(3, 4);
  EXPECT_EQ(decode_level(k3, CellLevel(9)), 1);
  EXPECT_EQ(decode_level(k3, CellLevel(7)), 7);
  EXPECT_EQ(decode_level(k3, CellLevel(0)), 0);
  EXPECT_THROW(decode_level(k3, CellLevel(15)), Error);
}

TEST(Codec, CanonicalGeneration) {
  const CodeSpec k3 = build_code(3, 4);
  EXPECT_EQ(canonical_generation(k3, CellLevel(5)), 0u);
  EXPECT_EQ(canonical_generation(k3, CellLevel(7)), 0u);
  EXPECT_EQ(canonical_generation(build_code(2, 4), CellLevel(4)), 1u);
  for (unsigned k = 1; k <= 4; ++k) {
    const CodeSpec spec = build_code(k, 4);
    for (unsigned level = 0; level <= spec.max_level(); ++level) {
      unsigned smallest = spec.generations();
      for (unsigned g = 0; g < spec.generations(); ++g) {
        const unsigned lo = g * spec.generation_span();
        if (level >= lo && level <= lo + spec.num_words() - 1) {
          smallest = g;
          break;
        }
      }
      EXPECT_EQ(canonical_generation(spec, CellLevel(level)), smallest);
    }
  }
}

TEST(Codec, EncodeNextExamples) {
  const CodeSpec k3 = build_code(3, 4);
  const CodeSpec k2 = build_code(2, 4);
  EXPECT_EQ(encode_next(k3, CellLevel(1), 5), CellLevel(5));
  EXPECT_EQ(encode_next(k3, CellLevel(5), 1), CellLevel(9));
  EXPECT_EQ(encode_next(k2, CellLevel(15), 3), CellLevel(15));
  EXPECT_FALSE(encode_next(k2, CellLevel(15), 0).has_value());
}

TEST(Codec, WorkedWriteSequences) {
  const CodeSpec k3 = build_code(3, 4);
  auto first = encode_next(k3, CellLevel(0), 0b101);
  ASSERT_TRUE(first);
  EXPECT_EQ(first->value, 5);
  EXPECT_EQ(encode_next(k3, *first, 0b001)->value, 9);

  first = encode_next(k3, CellLevel(0), 0b001);
  EXPECT_EQ(first->value, 1);
  EXPECT_EQ(encode_next(k3, *first, 0b101)->value, 5);
}

TEST(Codec, EncodeNextMatchesBruteForce) {
  for (unsigned k = 1; k <= 4; ++k) {
    const CodeSpec spec = build_code(k, 4);
    const auto table = oracle::codeword_table(spec);
    for (unsigned cur = 0; cur <= spec.max_level(); ++cur) {
      for (unsigned d = 0; d < spec.num_words(); ++d) {
        const auto want = oracle::min_reachable(table, cur, d);
        const auto got = encode_next(spec, CellLevel(cur), static_cast<DataWord>(d));
        ASSERT_EQ(got.has_value(), want.has_value()) << "k=" << k << " cur=" << cur << " d=" << d;
        if (want) {
          EXPECT_EQ(got->value, *want);
        }
      }
    }
  }
}

TEST(Codec, DecodeInvertsLevelOf) {
  for (unsigned n = 1; n <= 8; ++n) {
    for (unsigned k = 1; k <= n; ++k) {
      const CodeSpec spec = build_code(k, n);
      for (unsigned g = 0; g < spec.generations(); ++g) {
        for (unsigned d = 0; d < spec.num_words(); ++d) {
          const CellLevel level = level_of(spec, g, static_cast<DataWord>(d));
          ASSERT_EQ(decode_level(spec, level), d);
          ASSERT_LE(level.value, spec.max_level());
        }
      }
    }
  }
}

TEST(Codec, ExhaustionBoundary) {
  const CodeSpec k2 = build_code(2, 4);
  EXPECT_FALSE(is_exhausted(k2, CellLevel(12)));  // last base: every word reachable
  EXPECT_TRUE(is_exhausted(k2, CellLevel(13)));
  // A non-exhausted cell can always take any word.
  for (unsigned k = 1; k <= 4; ++k) {
    const CodeSpec spec = build_code(k, 4);
    for (unsigned cur = 0; cur <= spec.max_level(); ++cur) {
      bool all = true;
      for (unsigned d = 0; d < spec.num_words(); ++d) {
        all = all && encode_next(spec, CellLevel(cur), static_cast<DataWord>(d)).has_value();
      }
      EXPECT_EQ(all, !is_exhausted(spec, CellLevel(cur))) << "k=" << k << " cur=" << cur;
    }
  }
}

TEST(Codec, GenerationFloor) {
  // Any sequence of G writes from erased succeeds.
  std::mt19937_64 rng(7);
  for (unsigned k = 1; k <= 4; ++k) {
    const CodeSpec spec = build_code(k, 4);
    for (int trial = 0; trial < 2000; ++trial) {
      CellLevel cur;
      for (unsigned w = 0; w < spec.generations(); ++w) {
        const auto next = encode_next(spec, cur, static_cast<DataWord>(rng() % spec.num_words()));
        ASSERT_TRUE(next) << "k=" << k << " write " << w;
        ASSERT_LE(canonical_generation(spec, *next), w);
        cur = *next;
      }
    }
  }
}

TEST(Codec, EncodeAtGeneration) {
  const CodeSpec k2 = build_code(2, 4);
  EXPECT_EQ(encode_at_generation(k2, 0, 2).value, 2);
  EXPECT_EQ(encode_at_generation(k2, 1, 0).value, 4);
  EXPECT_EQ(encode_at_generation(build_code(1, 4), 14, 1).value, 15);
  try {
    encode_at_generation(k2, 5, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PageNotProgrammable);
  }
  // Monotone across generations for every word pair.
  for (unsigned g = 1; g < k2.generations(); ++g) {
    for (unsigned a = 0; a < 4; ++a) {
      for (unsigned b = 0; b < 4; ++b) {
        EXPECT_GE(encode_at_generation(k2, g, static_cast<DataWord>(b)),
                  encode_at_generation(k2, g - 1, static_cast<DataWord>(a)));
      }
    }
  }
}

TEST(Codec, NrMetadataBits) {
  EXPECT_EQ(nr_metadata_bits(build_code(2, 4)), 3u);
  EXPECT_EQ(nr_metadata_bits(build_code(1, 4)), 4u);
  EXPECT_EQ(nr_metadata_bits(build_code(3, 4)), 2u);
}

TEST(Packing, RoundTrip) {
  for (unsigned k : {1u, 2u, 3u, 4u}) {
    const CodeSpec spec = build_code(k, k == 3 ? 6 : 4);
    const auto logical = random_bytes(48, k);
    const PackedPage packed = pack_page(spec, logical, 16);
    for (const auto& block : packed.blocks) {
      for (DataWord w : block) ASSERT_LT(w, spec.num_words());
    }
    EXPECT_EQ(unpack_page(spec, packed), logical);
  }
  const PackedPage p = pack_page(build_code(2, 4), random_bytes(4096, 1));
  EXPECT_EQ(p.blocks.size(), 2u);
  EXPECT_EQ(p.blocks[0].size(), 8192u);
  EXPECT_THROW(pack_page(build_code(3, 4), random_bytes(12, 1)), Error);
}

class PageCodecTest : public ::testing::TestWithParam<std::pair<unsigned, unsigned>> {};

TEST_P(PageCodecTest, MatchesScalarCodec) {
  const auto [k, n] = GetParam();
  const CodeSpec spec = build_code(k, n);
  const PageCodec pc(spec);
  const std::size_t page_bytes = 64;
  const std::size_t cells = page_bytes * 8 / n;
  const std::size_t blocks = n / k;
  const unsigned mask = (1u << n) - 1;

  std::mt19937_64 rng(k * 10 + n);
  std::vector<std::uint8_t> levels(blocks * page_bytes, 0);
  for (int round = 0; round < 40; ++round) {
    const auto logical = random_bytes(page_bytes, rng());
    const PackedPage words = pack_page(spec, logical, cells);
    std::vector<std::uint8_t> readback(page_bytes);
    for (std::size_t b = 0; b < blocks; ++b) {
      std::span<std::uint8_t> cur(levels.data() + b * page_bytes, page_bytes);
      std::vector<std::uint8_t> out(page_bytes);
      std::vector<Patch> patches;
      const std::uint32_t ex = pc.encode_block(cur, logical, b, out, patches);

      std::vector<Patch> want_patches;
      std::uint32_t want_ex = 0;
      for (std::size_t c = 0; c < cells; ++c) {
        const unsigned byte = static_cast<unsigned>(c * n / 8);
        const unsigned shift = static_cast<unsigned>(c * n % 8);
        const CellLevel old((cur[byte] >> shift) & mask);
        const DataWord word = words.blocks[b][c];
        const auto next = encode_next(spec, old, word);
        const CellLevel got((out[byte] >> shift) & mask);
        if (next) {
          ASSERT_EQ(got, *next);
        } else {
          ASSERT_EQ(got, old);
          want_patches.push_back(Patch{static_cast<std::uint32_t>(c), word});
        }
        want_ex += is_exhausted(spec, got) ? 1 : 0;
      }
      ASSERT_EQ(patches, want_patches);
      ASSERT_EQ(ex, want_ex);
      ASSERT_EQ(pc.count_exhausted(out), want_ex);
      std::copy(out.begin(), out.end(), cur.begin());
      pc.decode_block(cur, patches, b, readback);
    }
    ASSERT_EQ(readback, logical) << "round " << round;
  }
}

TEST_P(PageCodecTest, GenerationTableMatchesScalar) {
  const auto [k, n] = GetParam();
  const CodeSpec spec = build_code(k, n);
  const PageCodec pc(spec);
  const std::size_t page_bytes = 32;
  const std::size_t cells = page_bytes * 8 / n;
  const unsigned mask = (1u << n) - 1;
  const auto logical = random_bytes(page_bytes, 99);
  const PackedPage words = pack_page(spec, logical, cells);
  std::vector<std::uint8_t> readback(page_bytes);
  for (unsigned g = 0; g < spec.generations(); ++g) {
    for (std::size_t b = 0; b < n / k; ++b) {
      std::vector<std::uint8_t> out(page_bytes);
      pc.encode_block_at_generation(g, logical, b, out);
      for (std::size_t c = 0; c < cells; ++c) {
        const CellLevel got((out[c * n / 8] >> (c * n % 8)) & mask);
        ASSERT_EQ(got, level_of(spec, g, words.blocks[b][c]));
      }
      pc.decode_block(out, {}, b, readback);
    }
    ASSERT_EQ(readback, logical);
  }
  std::vector<std::uint8_t> out(page_bytes);
  EXPECT_THROW(pc.encode_block_at_generation(spec.generations(), logical, 0, out), Error);
}

INSTANTIATE_TEST_SUITE_P(Codes, PageCodecTest,
                         ::testing::Values(std::pair{1u, 4u}, std::pair{2u, 4u}, std::pair{4u, 4u},
                                           std::pair{1u, 2u}, std::pair{2u, 2u}, std::pair{1u, 1u},
                                           std::pair{1u, 8u}, std::pair{2u, 8u}, std::pair{4u, 8u},
                                           std::pair{8u, 8u}));
