// rng.hpp -- keyed random streams for worker-count-invariant Monte Carlo.
//
// Every trial owns a generator seeded from (master seed, stream id, trial
// index), so a trial's draws never depend on which worker ran it or in
// what order.
#pragma once

#include <cstdint>
#include <limits>

namespace photocount {

inline constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stream identifiers; distinct ids give statistically independent streams
/// under one master seed.
enum class StreamId : std::uint64_t {
  kSymbol = 1,
  kIdealCounter = 2,
  kBits = 3,
};

/// xoshiro256** seeded through splitmix64. Satisfies
/// UniformRandomBitGenerator so it plugs into <random> distributions.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) { reseed(seed); }
  Rng(std::uint64_t seed, StreamId stream, std::uint64_t index) {
    std::uint64_t mix = seed;
    std::uint64_t key = splitmix64(mix) ^ static_cast<std::uint64_t>(stream) * 0xd1b54a32d192ed03ULL;
    key = splitmix64(key) ^ index;
    reseed(splitmix64(key));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  void reseed(std::uint64_t seed) {
    for (auto& word : s_) word = splitmix64(seed);
  }

  std::uint64_t s_[4]{};
};

}  // namespace photocount
