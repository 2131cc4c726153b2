#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <utility>

namespace ptrgeo {

// PCG64 (XSL-RR 128/64) keyed by (seed, stream). Every generated example and
// every training epoch gets its own stream, so results never depend on the
// order in which work is scheduled.
class Pcg64 {
 public:
  using result_type = std::uint64_t;

  Pcg64(std::uint64_t seed, std::uint64_t stream) {
    const unsigned __int128 init_state =
        (static_cast<unsigned __int128>(splitmix64(seed)) << 64) |
        splitmix64(seed ^ 0x6a09e667f3bcc909ULL);
    inc_ = (static_cast<unsigned __int128>(stream) << 1) | 1U;
    state_ = 0;
    step();
    state_ += init_state;
    step();
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    step();
    const auto hi = static_cast<std::uint64_t>(state_ >> 64);
    const auto lo = static_cast<std::uint64_t>(state_);
    const auto rot = static_cast<unsigned>(state_ >> 122);
    const std::uint64_t x = hi ^ lo;
    return (x >> rot) | (x << ((64U - rot) & 63U));
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Uniform integer in [lo, hi] by rejection (no modulo bias).
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
    const std::uint64_t span = hi - lo;
    if (span == max()) return (*this)();
    const std::uint64_t range = span + 1;
    const std::uint64_t limit = max() - max() % range;
    std::uint64_t r;
    do {
      r = (*this)();
    } while (r >= limit);
    return lo + r % range;
  }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(0, i - 1));
      std::swap(items[i - 1], items[j]);
    }
  }

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

 private:
  void step() { state_ = state_ * kMultiplier + inc_; }

  static constexpr unsigned __int128 kMultiplier =
      (static_cast<unsigned __int128>(0x2360ed051fc65da4ULL) << 64) | 0x4385df649fccf645ULL;

  unsigned __int128 state_ = 0;
  unsigned __int128 inc_ = 1;
};

}  // namespace ptrgeo
