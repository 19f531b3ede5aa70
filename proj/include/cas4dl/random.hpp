#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace cas4dl {

/// Mixes a 64-bit value with the SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Purpose tags used to carve disjoint substreams out of one base seed.
enum class StreamPurpose : std::uint64_t {
  Grid = 1,
  TestSet = 2,
  NetworkInit = 3,
  Sampling = 4,
  Noise = 5,
};

/// Derives the seed of the substream (purpose, trial, method, stage) of `base`.
///
/// The mapping is a fixed hash chain, so any single trial can be replayed
/// standalone from the base seed without running the others.
std::uint64_t derive_seed(std::uint64_t base, StreamPurpose purpose, std::uint64_t trial = 0,
                          std::uint64_t method = 0, std::uint64_t stage = 0);

/// Seeded random stream. The engine sequence is fixed by the standard; the
/// uniform and normal transforms are implemented here so draws are identical
/// across standard library implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi].
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n), n > 0, by masked rejection sampling.
  std::uint64_t uniform_index(std::uint64_t n);

  /// Standard normal via Box-Muller; caches the second variate.
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Textual engine state, including the cached normal variate.
  std::string serialize() const;
  static RandomStream deserialize(const std::string& state);

  bool operator==(const RandomStream& other) const = default;

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cas4dl
