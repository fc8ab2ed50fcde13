#pragma once

#include <cmath>
#include <cstdint>

namespace fraglump {

/// Philox4x32-10 counter-based generator. A stream is (key, block counter);
/// replica streams share the master key and own disjoint counter blocks, so
/// ensembles are reproducible and independent of scheduling order.
class Philox {
 public:
  Philox(std::uint64_t master_seed, std::uint64_t stream)
      : k0_(static_cast<std::uint32_t>(master_seed)),
        k1_(static_cast<std::uint32_t>(master_seed >> 32)),
        hi_(stream),
        lo_(0),
        idx_(4) {}

  std::uint32_t next_u32() {
    if (idx_ == 4) {
      fill();
      if (++lo_ == 0) ++hi_;
      idx_ = 0;
    }
    return out_[idx_++];
  }

  std::uint64_t next_u64() {
    std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  /// Uniform double in (0, 1).
  double u01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential(double rate) { return -std::log(u01()) / rate; }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;

  static void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                      std::uint32_t& lo) {
    std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
  }

  void fill() {
    std::uint32_t c0 = static_cast<std::uint32_t>(lo_);
    std::uint32_t c1 = static_cast<std::uint32_t>(lo_ >> 32);
    std::uint32_t c2 = static_cast<std::uint32_t>(hi_);
    std::uint32_t c3 = static_cast<std::uint32_t>(hi_ >> 32);
    std::uint32_t k0 = k0_, k1 = k1_;
    for (int round = 0; round < 10; ++round) {
      std::uint32_t hi0, lo0, hi1, lo1;
      mulhilo(kM0, c0, hi0, lo0);
      mulhilo(kM1, c2, hi1, lo1);
      std::uint32_t n0 = hi1 ^ c1 ^ k0;
      std::uint32_t n1 = lo1;
      std::uint32_t n2 = hi0 ^ c3 ^ k1;
      std::uint32_t n3 = lo0;
      c0 = n0;
      c1 = n1;
      c2 = n2;
      c3 = n3;
      k0 += kW0;
      k1 += kW1;
    }
    out_[0] = c0;
    out_[1] = c1;
    out_[2] = c2;
    out_[3] = c3;
  }

  std::uint32_t k0_, k1_;
  std::uint64_t hi_, lo_;  // 128-bit block counter
  std::uint32_t out_[4] = {0, 0, 0, 0};
  int idx_;
};

}  // namespace fraglump
