#pragma once

#include "woi/common.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace woi {

// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
// Stateless: maps (counter, key) to four 32-bit words.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      ctr = single_round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static Counter single_round(Counter const& c, Key const& k) noexcept {
    std::uint64_t const p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    std::uint64_t const p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    return {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0],
            static_cast<std::uint32_t>(p1),
            static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1],
            static_cast<std::uint32_t>(p0)};
  }
};

// SplitMix64 finalizer, used to fold structured stream identifiers into 64 bits.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Purpose tags keep streams drawn for different roles disjoint.
enum class StreamTag : std::uint64_t {
  kSchedule = 1,
  kWalker = 2,
  kGeometry = 3,
  kQueries = 4,
  kMisc = 5,
  kPartner = 6,
};

constexpr std::uint64_t stream_id(StreamTag tag, std::uint64_t a, std::uint64_t b = 0,
                                  std::uint64_t c = 0) noexcept {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(tag));
  h = mix64(h ^ a);
  h = mix64(h ^ (b + 0x632BE59BD9B4E019ull));
  h = mix64(h ^ (c + 0x8CB92BA72F3D8DD7ull));
  return h;
}

// Counter-based random stream keyed by (seed, stream id). Two streams with
// different ids never share state, so walkers can be generated in any order
// or on any thread and still reproduce bit-for-bit.
//
// Satisfies UniformRandomBitGenerator, so the standard distributions accept it.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    if (cursor_ == 2) refill();
    return buffer_[cursor_++];
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) noexcept {
    // Lemire's nearly-divisionless method, exact for all n.
    auto x = (*this)();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      std::uint64_t const threshold = (0 - n) % n;
      while (low < threshold) {
        x = (*this)();
        m = static_cast<__uint128_t>(x) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  double normal() { return normal_(*this); }

  // Uniformly distributed unit vector in R^dim.
  Vec direction(int dim) {
    Vec v(dim);
    double norm2 = 0.0;
    do {
      for (int k = 0; k < dim; ++k) v[k] = normal();
      norm2 = v.squaredNorm();
    } while (norm2 < 1e-300);
    return v / std::sqrt(norm2);
  }

  std::uint64_t blocks_consumed() const noexcept { return block_; }

 private:
  void refill() noexcept {
    Philox4x32::Counter const ctr{static_cast<std::uint32_t>(block_),
                                  static_cast<std::uint32_t>(block_ >> 32),
                                  static_cast<std::uint32_t>(stream_),
                                  static_cast<std::uint32_t>(stream_ >> 32)};
    auto const out = Philox4x32::generate(ctr, key_);
    buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
    ++block_;
    cursor_ = 0;
  }

  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int cursor_ = 2;
  std::normal_distribution<double> normal_;
};

}  // namespace woi
