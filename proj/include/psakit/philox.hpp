#pragma once

#include <array>
#include <cstdint>
#include <utility>

namespace psakit {

/**
 * Philox4x32-10 counter-based generator (Salmon, Moraes, Dror, Shaw,
 * "Parallel random numbers: as easy as 1, 2, 3", SC'11). A pure function
 * from (counter, key) to four 32-bit words; streams never share state, so
 * any shot of any stream can be regenerated in isolation. The constants and
 * the key schedule are pinned by published known-answer vectors in the test
 * suite; do not touch them.
 */
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr std::uint32_t M0 = 0xD2511F53u;
  static constexpr std::uint32_t M1 = 0xCD9E8D57u;
  static constexpr std::uint32_t W0 = 0x9E3779B9u;  // golden ratio
  static constexpr std::uint32_t W1 = 0xBB67AE85u;  // sqrt(3) - 1

  static Counter block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round != 0) {
        key[0] += W0;
        key[1] += W1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
             static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
             static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }
};

/**
 * A stream of uniforms indexed by shot number. Counter layout: words 0,1
 * hold the shot index, word 2 the stream id (one stream per tested context
 * pair), word 3 is zero; the key is the user seed. uniform_at(t) is
 * stateless, so resampling any prefix reproduces bit-identical draws.
 */
class PhiloxStream {
public:
  explicit PhiloxStream(std::uint64_t seed, std::uint32_t stream = 0)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  Philox4x32::Counter block_at(std::uint64_t index) const {
    return Philox4x32::block({static_cast<std::uint32_t>(index),
                              static_cast<std::uint32_t>(index >> 32),
                              stream_, 0u},
                             key_);
  }

  /// Uniform in [0,1) from the top 53 bits of words 0,1 of the block.
  double uniform_at(std::uint64_t index) const {
    const auto b = block_at(index);
    const std::uint64_t bits =
        (static_cast<std::uint64_t>(b[1]) << 32) | b[0];
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
  }

  /// Two independent uniforms from one block (words 0,1 and 2,3).
  std::pair<double, double> uniform_pair_at(std::uint64_t index) const {
    const auto b = block_at(index);
    const std::uint64_t lo = (static_cast<std::uint64_t>(b[1]) << 32) | b[0];
    const std::uint64_t hi = (static_cast<std::uint64_t>(b[3]) << 32) | b[2];
    return {static_cast<double>(lo >> 11) * 0x1.0p-53,
            static_cast<double>(hi >> 11) * 0x1.0p-53};
  }

private:
  Philox4x32::Key key_;
  std::uint32_t stream_;
};

}
