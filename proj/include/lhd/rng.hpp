#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

namespace lhd {

inline constexpr std::uint64_t splitmix64_next(std::uint64_t& state) noexcept {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Reproducible random stream identified by (seed, stream-id).
///
/// Generator: xoshiro256** (Blackman & Vigna). The 256-bit state is filled
/// with four SplitMix64 outputs whose starting state is
/// `seed ^ splitmix64(stream_id ^ 0xD1B54A32D192ED03)`. Bounded integers use
/// rejection sampling on the raw 64-bit output and reals take the top 53
/// bits, so the draw sequence is identical on every platform and compiler.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream_id = 0)
      : seed_(seed), stream_id_(stream_id) {
    std::uint64_t mix = stream_id ^ 0xD1B54A32D192ED03ULL;
    std::uint64_t sm = seed ^ splitmix64_next(mix);
    for (auto& word : state_) word = splitmix64_next(sm);
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept { return next(); }

  std::uint64_t next() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0, bound). bound must be positive.
  std::uint64_t uniform_below(std::uint64_t bound) noexcept {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  // Uniform on [0, 1).
  double uniform01() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) noexcept { return uniform01() < p; }

  // Fisher-Yates, last position first.
  template <class T>
  void shuffle(std::span<T> values) noexcept {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  // Two distinct indices in [0, n), n >= 2.
  std::pair<std::size_t, std::size_t> distinct_pair(std::size_t n) noexcept {
    const auto i = static_cast<std::size_t>(uniform_below(n));
    auto j = static_cast<std::size_t>(uniform_below(n - 1));
    if (j >= i) ++j;
    return {i, j};
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t state_[4]{};
};

}  // namespace lhd
