#include "womv/workload.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>

#include "womv/error.hpp"

namespace womv::workload {

namespace {

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::ConfigError, what);
}

std::string normalize(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c == ' ') continue;
    out.push_back(c == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

void fill_random(std::uint64_t seed, std::span<std::uint8_t> out) {
  std::mt19937_64 engine(seed);
  std::size_t i = 0;
  for (; i + 8 <= out.size(); i += 8) {
    const std::uint64_t v = engine();
    std::memcpy(out.data() + i, &v, 8);
  }
  if (i < out.size()) {
    const std::uint64_t v = engine();
    std::memcpy(out.data() + i, &v, out.size() - i);
  }
}

}  // namespace

std::uint64_t Rng::below(std::uint64_t bound) {
  // Rejection keeps the draw unbiased.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = engine_();
    if (r >= threshold) return r % bound;
  }
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1) + 0xbf58476d1ce4e5b9ull * (c + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

void synth_data(const DataPolicy& policy, std::uint64_t salt, std::span<const std::uint8_t> prior,
                std::span<std::uint8_t> out) {
  switch (policy.kind) {
    case DataPolicy::Kind::Random:
      fill_random(mix_seed(policy.seed, salt, 1), out);
      return;
    case DataPolicy::Kind::Fixed:
      fill_random(mix_seed(policy.seed, 0, 2), out);
      return;
    case DataPolicy::Kind::FlipFraction:
      break;
  }
  if (prior.size() != out.size()) {
    throw Error(ErrorCode::ParameterOutOfRange, "FlipFraction needs the prior page");
  }
  if (!(policy.fraction >= 0.0 && policy.fraction <= 1.0)) {
    throw Error(ErrorCode::ParameterOutOfRange, "flip fraction outside [0, 1]");
  }
  const std::uint64_t bits = out.size() * 8;
  std::uint64_t count = static_cast<std::uint64_t>(std::llround(policy.fraction * bits));
  // Sample the smaller of the flip set and its complement (Floyd's algorithm).
  const bool complement = count * 2 > bits;
  if (complement) count = bits - count;

  std::vector<std::uint64_t> mask((bits + 63) / 64, 0);
  Rng rng(mix_seed(policy.seed, salt, 3));
  for (std::uint64_t j = bits - count; j < bits; ++j) {
    std::uint64_t t = rng.below(j + 1);
    if (mask[t / 64] >> (t % 64) & 1) t = j;
    mask[t / 64] |= std::uint64_t{1} << (t % 64);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto m = static_cast<std::uint8_t>(mask[i / 8] >> (8 * (i % 8)));
    if (complement) m = static_cast<std::uint8_t>(~m);
    out[i] = prior[i] ^ m;
  }
}

// ---------------------------------------------------------------------------

void MicrobenchSpec::validate() const {
  if (page_bytes == 0 || total_bytes % page_bytes != 0) {
    config_error("total_bytes must be a multiple of the page size");
  }
  if (!(flip_fraction >= 0.0 && flip_fraction <= 1.0)) config_error("flip fraction outside [0, 1]");
  if (!(hot_fraction > 0.0 && hot_fraction <= 1.0)) config_error("hot fraction outside (0, 1]");
  if (!(hot_share >= 0.0 && hot_share <= 1.0)) config_error("hot share outside [0, 1]");
}

std::string to_string(MicrobenchKind kind) {
  switch (kind) {
    case MicrobenchKind::DataChange: return "data-change";
    case MicrobenchKind::HotS: return "hot-s";
    case MicrobenchKind::HotR: return "hot-r";
    case MicrobenchKind::Cold: return "cold";
    case MicrobenchKind::LowGC: return "low-gc";
    case MicrobenchKind::HighGC: return "high-gc";
  }
  return "?";
}

std::string MicrobenchSpec::name() const {
  char buf[32];
  switch (kind) {
    case MicrobenchKind::DataChange:
      std::snprintf(buf, sizeof buf, "(%g)", flip_fraction);
      return to_string(kind) + buf;
    case MicrobenchKind::Cold:
      std::snprintf(buf, sizeof buf, "(%g)", hot_fraction);
      return to_string(kind) + buf;
    default:
      return to_string(kind);
  }
}

MicrobenchKind parse_microbench_kind(std::string_view text, double* parameter) {
  std::string s = normalize(text);
  std::optional<double> arg;
  if (const auto open = s.find('('); open != std::string::npos) {
    const auto close = s.find(')', open);
    if (close == std::string::npos || close + 1 != s.size()) {
      config_error("bad workload '" + std::string(text) + "'");
    }
    try {
      arg = std::stod(s.substr(open + 1, close - open - 1));
    } catch (const std::exception&) {
      config_error("bad workload parameter in '" + std::string(text) + "'");
    }
    s.resize(open);
  }
  std::erase(s, '-');
  MicrobenchKind kind;
  if (s == "datachange") {
    kind = MicrobenchKind::DataChange;
  } else if (s == "hots") {
    kind = MicrobenchKind::HotS;
  } else if (s == "hotr") {
    kind = MicrobenchKind::HotR;
  } else if (s == "cold") {
    kind = MicrobenchKind::Cold;
  } else if (s == "lowgc") {
    kind = MicrobenchKind::LowGC;
  } else if (s == "highgc") {
    kind = MicrobenchKind::HighGC;
  } else {
    config_error("unknown workload '" + std::string(text) + "'");
  }
  const bool takes_arg = kind == MicrobenchKind::DataChange || kind == MicrobenchKind::Cold;
  if (arg && !takes_arg) config_error("workload '" + std::string(text) + "' takes no parameter");
  if (kind == MicrobenchKind::DataChange && !arg) {
    config_error("data-change needs a flip fraction, e.g. data-change(0.5)");
  }
  if (parameter && arg) *parameter = *arg;
  return kind;
}

MicrobenchGenerator::MicrobenchGenerator(const MicrobenchSpec& spec, std::uint32_t logical_pages)
    : spec_(spec), pages_(logical_pages), total_(spec.total_writes()), rng_(spec.seed) {
  spec_.validate();
  if (pages_ == 0) config_error("microbenchmark needs at least one logical page");
  if (spec_.kind == MicrobenchKind::HotR) {
    order_.resize(pages_);
    std::iota(order_.begin(), order_.end(), 0u);
  }
  hot_pages_ = std::clamp<std::uint32_t>(
      static_cast<std::uint32_t>(std::llround(spec_.hot_fraction * pages_)), 1, pages_);
}

std::uint32_t MicrobenchGenerator::next_lpa() {
  const std::uint64_t pos = seq_ % pages_;
  const bool first_pass = seq_ < pages_;
  switch (spec_.kind) {
    case MicrobenchKind::DataChange:
    case MicrobenchKind::HotS:
      return static_cast<std::uint32_t>(pos);
    case MicrobenchKind::HotR:
      if (pos == 0) {
        for (std::uint32_t i = pages_ - 1; i > 0; --i) {
          std::swap(order_[i], order_[rng_.below(i + 1)]);
        }
      }
      return order_[pos];
    case MicrobenchKind::Cold:
      if (first_pass) return static_cast<std::uint32_t>(pos);
      return static_cast<std::uint32_t>(rng_.below(hot_pages_));
    case MicrobenchKind::LowGC: {
      if (first_pass) return static_cast<std::uint32_t>(pos);
      const std::uint32_t cold = pages_ - hot_pages_;
      if (cold == 0 || rng_.unit() < spec_.hot_share) {
        return static_cast<std::uint32_t>(rng_.below(hot_pages_));
      }
      return hot_pages_ + static_cast<std::uint32_t>(rng_.below(cold));
    }
    case MicrobenchKind::HighGC:
      if (first_pass) return static_cast<std::uint32_t>(pos);
      return static_cast<std::uint32_t>(rng_.below(pages_));
  }
  return 0;
}

std::optional<WorkloadEvent> MicrobenchGenerator::next() {
  if (seq_ >= total_) return std::nullopt;
  WorkloadEvent e;
  e.seq = seq_;
  e.op = Op::Write;
  e.lpa = next_lpa();
  if (spec_.kind == MicrobenchKind::DataChange && seq_ >= pages_) {
    e.data = DataPolicy::flip(spec_.flip_fraction, spec_.seed);
  } else {
    e.data = DataPolicy::random(spec_.seed);
  }
  ++seq_;
  return e;
}

std::vector<WorkloadEvent> generate(const MicrobenchSpec& spec, std::uint32_t logical_pages) {
  MicrobenchGenerator gen(spec, logical_pages);
  std::vector<WorkloadEvent> out;
  out.reserve(gen.total_events());
  while (auto e = gen.next()) out.push_back(*e);
  return out;
}

}  // namespace womv::workload
