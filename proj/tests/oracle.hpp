#pragma once

// Brute-force reference models shared by the unit and acceptance tests.

#include <map>
#include <optional>
#include <set>
#include <utility>

#include "womv/codec.hpp"

namespace womv::oracle {

// Every (level, word) pair the code can ever store, found by enumerating the
// generation table rather than by residue arithmetic.
inline std::set<std::pair<unsigned, unsigned>> codeword_table(const codec::CodeSpec& spec) {
  std::set<std::pair<unsigned, unsigned>> table;
  for (unsigned g = 0; g < spec.generations(); ++g) {
    for (unsigned d = 0; d < spec.num_words(); ++d) {
      table.emplace(codec::level_of(spec, g, static_cast<codec::DataWord>(d)).value, d);
    }
  }
  return table;
}

// Minimal table level >= current that stores `word`; nullopt if none.
inline std::optional<unsigned> min_reachable(const std::set<std::pair<unsigned, unsigned>>& table,
                                             unsigned current, unsigned word) {
  std::optional<unsigned> best;
  for (const auto& [level, d] : table) {
    if (d == word && level >= current && (!best || level < *best)) best = level;
  }
  return best;
}

// Generation count by walking the chain of bands upward from level 0: each
// band holds 2^k levels and the next starts on its top level.
inline unsigned chain_generations(unsigned k, unsigned n) {
  const unsigned top = (1u << n) - 1;
  unsigned base = 0;
  unsigned count = 0;
  while (base + (1u << k) - 1 <= top) {
    ++count;
    base += (1u << k) - 1;
  }
  return count;
}

}  // namespace womv::oracle
