#pragma once

#include <cstdint>
#include <random>

namespace lesionkit {

/// SplitMix64 finalizer; used to derive independent engine seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seeded random source with platform-independent output.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The distributions are implemented here rather than taken from
/// <random> because the standard leaves their algorithms unspecified.
///
/// Streams: Rng(seed, stream) seeds the engine with
/// splitmix64(seed ^ splitmix64(stream + 1)), so each (seed, stream) pair gives
/// an independent sequence. Modules reserve fixed stream ids for each purpose.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n) by rejection; n must be > 0.
  std::uint64_t below(std::uint64_t n);
  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t between(std::int64_t lo, std::int64_t hi);
  /// Standard normal via the Box-Muller transform (caches the second deviate).
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

namespace streams {
inline constexpr std::uint64_t kAugmentNoise = 1;
inline constexpr std::uint64_t kSamplerForeground = 10;
inline constexpr std::uint64_t kSamplerUniform = 11;
inline constexpr std::uint64_t kPhantomPlacement = 20;
inline constexpr std::uint64_t kPhantomNoise = 21;
inline constexpr std::uint64_t kPhantomCorruption = 22;
}  // namespace streams

}  // namespace lesionkit
