#pragma once

#include <cstdint>

namespace gnep {

/// Deterministic pseudo-random stream built on SplitMix64.
///
/// The i-th draw of a stream with key k is the SplitMix64 finalizer applied to
/// k + (i + 1) * 0x9E3779B97F4A7C15. Streams for independent runs are derived
/// with split(), which hashes the parent key together with a child id. Doubles
/// take the top 53 bits of a draw, so sequences are bit-identical across
/// compilers and standard libraries.
class RngStream {
public:
  explicit RngStream(std::uint64_t seed = 0) noexcept : key_(mix(seed ^ kSeedSalt)) {}

  /// Child stream, independent of the parent and of siblings with other ids.
  RngStream split(std::uint64_t id) const noexcept {
    RngStream child;
    child.key_ = mix(key_ ^ mix(id + kGamma));
    return child;
  }

  std::uint64_t next_u64() noexcept {
    counter_ += kGamma;
    return mix(key_ + counter_);
  }

  /// Uniform on [0, 1).
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on [-half_width, half_width).
  double symmetric(double half_width) noexcept { return half_width * (2.0 * uniform() - 1.0); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) noexcept { return n == 0 ? 0 : next_u64() % n; }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t draws() const noexcept { return counter_ / kGamma; }

private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kSeedSalt = 0x6A09E667F3BCC909ULL;

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace gnep
