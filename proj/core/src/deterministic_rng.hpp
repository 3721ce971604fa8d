#pragma once

#include <cstdint>

namespace dpeigen::detail {

// splitmix64 step; the generator behind all randomized paths. Chosen over
// <random> distributions because its double output is bit-reproducible
// across standard library implementations.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class DeterministicRng {
public:
  explicit DeterministicRng(std::uint64_t seed) : state_(seed) {
    // Warm up so that small, similar seeds decorrelate.
    splitmix64(state_);
    splitmix64(state_);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(splitmix64(state_) >> 11) * 0x1.0p-53;
  }

  // Uniform in (-1, 1).
  double uniform_signed() { return 2.0 * uniform() - 1.0; }

  // Uniform in [lo, hi).
  double uniform_in(double lo, double hi) {
    return lo + (hi - lo) * uniform();
  }

private:
  std::uint64_t state_;
};

// Combines a base seed with stream indices into an independent stream seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a,
                              std::uint64_t b = 0) {
  std::uint64_t state = seed;
  splitmix64(state);
  state ^= 0x632be59bd9b4e019ULL + a;
  splitmix64(state);
  state ^= 0x9e6c63d0876a9a62ULL + b;
  return splitmix64(state);
}

}  // namespace dpeigen::detail
