#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace dppnys {

/// Philox4x32-10 counter-based generator.
///
/// The 64-bit seed is the Philox key; the 128-bit counter is split into a
/// 64-bit stream id (high half) and a 64-bit block index (low half). Two
/// generators with the same seed and different stream ids never share a
/// counter, so independent replicas are obtained by `Rng(seed, replica_id)`
/// or `parent.split(id)` without any coordination.
///
/// Satisfies UniformRandomBitGenerator, but the helpers below (`uniform`,
/// `below`, `normal`) are preferred: they are bit-reproducible across
/// standard library implementations, unlike the <random> distributions.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        seed_(seed),
        stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (buffered_ == 0) refill();
    return buffer_[--buffered_];
  }

  /// Child generator on a stream derived from (this stream, id).
  Rng split(std::uint64_t id) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n);

  bool bit() { return ((*this)() >> 63) != 0; }

  /// Standard normal via Box-Muller (the second variate is cached).
  double normal();

  /// Raw Philox4x32-10 block function, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> philox(std::array<std::uint32_t, 4> counter,
                                             std::array<std::uint32_t, 2> key);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// Stable 64-bit mix used to derive stream ids from labels.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t hash_label(const char* label, std::uint64_t salt = 0);

}  // namespace dppnys
