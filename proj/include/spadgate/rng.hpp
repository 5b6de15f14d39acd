#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace spadgate {

/// Reproducible substream of a 64-bit Mersenne twister keyed by (seed, stream).
///
/// Every pixel, the data-bit source and the warm-up source get their own
/// stream id, so results do not depend on how work is split across threads.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32), 0x5ad6a7e1u};
    engine_.seed(seq);
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform on (0, 1].
  double uniform_open() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1p-53;
  }

  /// Exponential variate with unit mean.
  double exponential() { return -std::log(uniform_open()); }

  bool bit() { return (engine_() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
};

namespace streams {
// Pixel i uses stream i; auxiliary sources sit far above any array size.
inline constexpr std::uint64_t kDataBits = 0xB175'0000'0000ull;
inline constexpr std::uint64_t kWarmupBits = 0xB175'0000'0001ull;
inline constexpr std::uint64_t kTrace = 0x7ACE'0000'0000ull;
}  // namespace streams

}  // namespace spadgate
