#pragma once

#include <array>
#include <cstdint>
#include <limits>

#include <boost/random/normal_distribution.hpp>

namespace bcp::rng {

/// Philox4x32-10 counter-based generator (Salmon et al.).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter apply(Counter c, Key k) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int r = 0; r < 10; ++r) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * c[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * c[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
      c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
      k[0] += W0;
      k[1] += W1;
    }
    return c;
  }

  /// Two independent blocks, interleaved for instruction-level parallelism.
  static void apply2(Counter& a, Counter& b, Key k) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int r = 0; r < 10; ++r) {
      const std::uint64_t pa0 = static_cast<std::uint64_t>(M0) * a[0];
      const std::uint64_t pa1 = static_cast<std::uint64_t>(M1) * a[2];
      const std::uint64_t pb0 = static_cast<std::uint64_t>(M0) * b[0];
      const std::uint64_t pb1 = static_cast<std::uint64_t>(M1) * b[2];
      a = {static_cast<std::uint32_t>(pa1 >> 32) ^ a[1] ^ k[0], static_cast<std::uint32_t>(pa1),
           static_cast<std::uint32_t>(pa0 >> 32) ^ a[3] ^ k[1], static_cast<std::uint32_t>(pa0)};
      b = {static_cast<std::uint32_t>(pb1 >> 32) ^ b[1] ^ k[0], static_cast<std::uint32_t>(pb1),
           static_cast<std::uint32_t>(pb0 >> 32) ^ b[3] ^ k[1], static_cast<std::uint32_t>(pb0)};
      k[0] += W0;
      k[1] += W1;
    }
  }
};

/// Random stream of one path: a pure function of (seed, path, tag).
/// Satisfies UniformRandomBitGenerator with 32-bit output.
class Stream {
 public:
  using result_type = std::uint32_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  Stream(std::uint64_t seed, std::uint64_t path, std::uint32_t tag = 0)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        path_(path),
        tag_(tag) {}

  result_type operator()() {
    if (pos_ == 8) refill();
    return words_[pos_++];
  }

  /// Uniform on (0, 1) with 53 random bits.
  double uniform() {
    const std::uint32_t a = (*this)(), b = (*this)();
    const std::uint64_t m = (static_cast<std::uint64_t>(a >> 5) << 26) | (b >> 6);
    return (static_cast<double>(m) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal (ziggurat).
  double normal() { return normal_(*this); }

 private:
  void refill() {
    Philox4x32::Counter a{static_cast<std::uint32_t>(block_), tag_,
                          static_cast<std::uint32_t>(path_), static_cast<std::uint32_t>(path_ >> 32)};
    Philox4x32::Counter b = a;
    b[0] += 1;
    block_ += 2;
    Philox4x32::apply2(a, b, key_);
    for (int i = 0; i < 4; ++i) {
      words_[i] = a[i];
      words_[4 + i] = b[i];
    }
    pos_ = 0;
  }

  Philox4x32::Key key_;
  std::uint64_t path_;
  std::uint32_t tag_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 8> words_{};
  int pos_ = 8;
  boost::random::normal_distribution<double> normal_;
};

}  // namespace bcp::rng
