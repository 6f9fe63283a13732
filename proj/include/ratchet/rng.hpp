#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace ratchet {

/// Philox4x32-10 counter-based generator (Salmon et al. constants).
/// A stream is addressed by (master seed, replicate index); the pair fully
/// determines every draw, independent of scheduling.
struct Philox4x32 {
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
      std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
      std::array<std::uint32_t, 4> next;
      next[0] = static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0];
      next[1] = static_cast<std::uint32_t>(p1);
      next[2] = static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1];
      next[3] = static_cast<std::uint32_t>(p0);
      ctr = next;
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }
};

class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t replicate)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        hi_{static_cast<std::uint32_t>(replicate),
            static_cast<std::uint32_t>(replicate >> 32)} {}

  std::uint64_t next_u64() {
    if (cursor_ == 0) refill();
    std::uint64_t lo = buffer_[cursor_ == 2 ? 0 : 2];
    std::uint64_t hi = buffer_[cursor_ == 2 ? 1 : 3];
    cursor_ -= 1;
    return lo | (hi << 32);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Exponential waiting time by inverse CDF.
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Unbiased integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    for (;;) {
      std::uint64_t v = next_u64();
      if (v < limit) return v % n;
    }
  }

 private:
  void refill() {
    buffer_ = Philox4x32::block(
        {static_cast<std::uint32_t>(block_),
         static_cast<std::uint32_t>(block_ >> 32), hi_[0], hi_[1]},
        key_);
    ++block_;
    cursor_ = 2;
  }

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 2> hi_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int cursor_ = 0;  // u64 draws left in buffer
};

/// Canonical 64-bit fingerprint of the stream addressed by (seed, replicate):
/// the stream's first draw. Injective in the replicate index for fixed seed
/// (Philox is a bijection of the counter space).
inline std::uint64_t seed_stream(std::uint64_t master_seed,
                                 std::uint64_t replicate_index) {
  return RngStream(master_seed, replicate_index).next_u64();
}

}  // namespace ratchet
