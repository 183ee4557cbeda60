#pragma once

#include <cstdint>

namespace cellhom {

// splitmix64 generator. Small, fully portable, and fast; every stream is
// derived by hashing its identifying integers so results do not depend on
// call order, thread count, or platform library details.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : m_state(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (m_state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform in [a, b)
  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

 private:
  std::uint64_t m_state;
};

// Order-independent stream derivation: hash two 64-bit values into one.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  Rng r(a ^ (b * 0xff51afd7ed558ccdULL + 0x2545f4914f6cdd1dULL));
  r.next_u64();
  return r.next_u64();
}

}  // namespace cellhom
