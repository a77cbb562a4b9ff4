#pragma once

#include <cstdint>

namespace qflow {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based generator: SplitMix64 applied to (key, counter). A stream is
// addressed by (seed, a, b), so e.g. stream (seed, trial, path) yields the
// same numbers no matter which thread or in which order it is consumed.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0)
      : key_(splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b)) {}

  std::uint64_t next() {
    return splitmix64(key_ + 0x632be59bd9b4e019ULL * counter_++);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace qflow
