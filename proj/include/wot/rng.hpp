#pragma once

#include <cassert>
#include <cstdint>
#include <random>

namespace wot {

// One SplitMix64 step. Used only for seed derivation, never as the main
// generator.
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Derive the seed of substream `stream` from a base seed. Two mixing rounds so
// that related (base, stream) pairs land far apart.
inline uint64_t mix_seed(uint64_t base, uint64_t stream) {
  uint64_t s = base ^ (0xd1b54a32d192ed03ull * (stream + 1));
  uint64_t a = splitmix64(s);
  uint64_t b = splitmix64(s);
  return a ^ (b >> 1);
}

// Deterministic random stream. std::mt19937_64's output sequence is fixed by
// the standard, and all derived draws below avoid std::*_distribution (whose
// algorithms are implementation-defined), so any seed reproduces byte-exact
// results on every platform.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  // uniform in [0,1), 53 random bits
  double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return unit() < p; }

  int bit() { return static_cast<int>(next_u64() >> 63); }

  // uniform in [0, n), unbiased via rejection
  uint64_t below(uint64_t n) {
    assert(n > 0);
    uint64_t rem = (UINT64_MAX % n + 1) % n;  // 2^64 mod n
    uint64_t limit = 0 - rem;                 // largest multiple of n, mod 2^64
    uint64_t v = next_u64();
    while (rem != 0 && v >= limit) v = next_u64();
    return v % n;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace wot
