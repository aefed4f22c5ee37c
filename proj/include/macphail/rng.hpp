#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace macphail {

// The project's one random generator: xoshiro256++ (Blackman & Vigna),
// seeded through splitmix64. Self-contained so that identical seeds give
// identical streams on every build, which the reproducibility contract of
// the CLI depends on (std:: distributions are implementation-defined).

inline uint64_t splitmix64_next(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Per-trial seed derivation h(seed, trial): one splitmix64 step of
// seed XOR (trial+1)*golden-ratio. Parallel trials reproduce serial runs.
inline uint64_t derive_seed(uint64_t seed, uint64_t trial) {
  uint64_t state = seed ^ ((trial + 1) * 0x9e3779b97f4a7c15ull);
  return splitmix64_next(state);
}

class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64_next(sm);
  }

  uint64_t next() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // uniform in [0,1) with 53 random bits
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform in (-1,1)
  double uniform_sym() { return 2.0 * uniform01() - 1.0; }

  // standard normal via Marsaglia polar rejection (no cached spare, so the
  // stream position is a pure function of the number of calls)
  double normal() {
    for (;;) {
      double u = uniform_sym();
      double v = uniform_sym();
      double q = u * u + v * v;
      if (q > 0.0 && q < 1.0) return u * std::sqrt(-2.0 * std::log(q) / q);
    }
  }

  std::complex<double> normal_complex() {
    double re = normal();
    double im = normal();
    return {re, im};
  }

  // uniform on the closed unit disc, rejection from the square
  std::complex<double> unit_disc() {
    for (;;) {
      double re = uniform_sym();
      double im = uniform_sym();
      if (re * re + im * im <= 1.0) return {re, im};
    }
  }

  // uniform over {0, ..., bound-1} by rejection (unbiased)
  uint64_t below(uint64_t bound) {
    if (bound <= 1) return 0;
    uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  uint64_t s_[4];
};

}  // namespace macphail
