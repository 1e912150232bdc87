#pragma once

// Synthetic workloads: the microbenchmark suite and page content synthesis.
// Everything is a pure function of the spec and its seed.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace womv::workload {

enum class Op : std::uint8_t { Read, Write };

struct DataPolicy {
  enum class Kind : std::uint8_t { Random, FlipFraction, Fixed };
  Kind kind = Kind::Random;
  double fraction = 0.0;  // FlipFraction only
  std::uint64_t seed = 0;

  static DataPolicy random(std::uint64_t seed) { return {Kind::Random, 0.0, seed}; }
  static DataPolicy flip(double f, std::uint64_t seed) { return {Kind::FlipFraction, f, seed}; }
  static DataPolicy fixed(std::uint64_t seed) { return {Kind::Fixed, 0.0, seed}; }

  friend bool operator==(const DataPolicy&, const DataPolicy&) = default;
};

struct WorkloadEvent {
  std::uint64_t seq = 0;
  Op op = Op::Write;
  std::uint32_t lpa = 0;
  DataPolicy data;

  friend bool operator==(const WorkloadEvent&, const WorkloadEvent&) = default;
};

// Seeded generator shared by everything that needs randomness. The bounded
// draw is written out (rather than using std distributions) so streams are
// identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, bound); bound > 0.
  std::uint64_t below(std::uint64_t bound);
  // Uniform in [0, 1) with 53 bits.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

// Mixes several values into one seed (splitmix64 finaliser).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0);

// Fills `out` for the given policy. FlipFraction copies `prior` and flips
// round(f * bits) distinct bit positions; it requires prior.size() == out.size().
// `salt` distinguishes otherwise identical draws (typically the event seq).
void synth_data(const DataPolicy& policy, std::uint64_t salt, std::span<const std::uint8_t> prior,
                std::span<std::uint8_t> out);

// Microbenchmarks ----------------------------------------------------------

enum class MicrobenchKind : std::uint8_t { DataChange, HotS, HotR, Cold, LowGC, HighGC };

struct MicrobenchSpec {
  MicrobenchKind kind = MicrobenchKind::HotS;
  double flip_fraction = 0.0;  // DataChange
  double hot_fraction = 0.2;   // Cold, LowGC
  double hot_share = 0.8;      // LowGC: share of writes going to the hot region
  std::uint64_t total_bytes = 0;
  std::uint64_t seed = 0;
  std::uint32_t page_bytes = 4096;

  std::uint64_t total_writes() const noexcept { return total_bytes / page_bytes; }
  // Throws Error(ConfigError).
  void validate() const;
  // e.g. "hot-s", "data-change(0.25)", "cold(0.2)"
  std::string name() const;
};

// Accepts hot-s, hot-r, cold[(h)], low-gc, high-gc, data-change(f). Case and
// '_' vs '-' are not significant. Throws Error(ConfigError).
MicrobenchKind parse_microbench_kind(std::string_view text, double* parameter = nullptr);
std::string to_string(MicrobenchKind kind);

class MicrobenchGenerator {
 public:
  MicrobenchGenerator(const MicrobenchSpec& spec, std::uint32_t logical_pages);

  std::optional<WorkloadEvent> next();
  std::uint64_t total_events() const noexcept { return total_; }
  std::uint32_t logical_pages() const noexcept { return pages_; }

 private:
  std::uint32_t next_lpa();

  MicrobenchSpec spec_;
  std::uint32_t pages_;
  std::uint64_t total_;
  std::uint64_t seq_ = 0;
  Rng rng_;
  std::vector<std::uint32_t> order_;  // HotR pass permutation
  std::uint32_t hot_pages_ = 0;
};

// Convenience for tests: the whole stream.
std::vector<WorkloadEvent> generate(const MicrobenchSpec& spec, std::uint32_t logical_pages);

}  // namespace womv::workload
