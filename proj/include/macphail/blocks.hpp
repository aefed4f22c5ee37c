#pragma once

#include <cmath>
#include <cstdint>
#include <optional>

#include "macphail/big_uint.hpp"
#include "macphail/config.hpp"

namespace macphail {

// Block k covers the index range {j_k, ..., 2 j_k - 1} with j_k = alpha^{k(k-1)}.
// Everything here is pure integer / closed-form arithmetic; block membership is
// never decided by floating-point logarithms.

struct BlockIndex {
  uint32_t k = 0;
  BigUInt start;  // j_k

  BigUInt last() const {
    BigUInt hi = start;
    hi.mul_u32(2);
    hi -= BigUInt(1);
    return hi;
  }
};

inline BigUInt block_start(uint32_t k, uint64_t alpha) {
  return BigUInt::power(alpha, static_cast<uint64_t>(k) * (k - 1));
}

inline BlockIndex block_index(uint32_t k, const Config& cfg) {
  if (k < 1) throw std::invalid_argument("block number must be >= 1");
  return BlockIndex{k, block_start(k, cfg.alpha)};
}

namespace detail {

// Exact membership test: j in block k iff alpha^{k(k-1)} <= j and
// j+1 <= 2*alpha^{k(k-1)}. This is the exponentiated form of the closed
// interval [1/2+sqrt(1/4+log_a((j+1)/2)), 1/2+sqrt(1/4+log_a j)] containing k.
inline bool in_block(const BigUInt& j, uint32_t k, uint64_t alpha) {
  BigUInt jk = block_start(k, alpha);
  if (j < jk) return false;
  BigUInt upper = jk;
  upper.mul_u32(2);  // j+1 <= 2 j_k  <=>  j < 2 j_k
  return j < upper;
}

}  // namespace detail

// Walk blocks upward until j_k passes j. Cost grows like sqrt(log_alpha j).
inline std::optional<uint32_t> locate_block_range(const BigUInt& j, const Config& cfg) {
  if (j.is_zero()) throw std::invalid_argument("series index j must be >= 1");
  BigUInt jk(1);
  for (uint32_t k = 1;; ++k) {
    if (jk > j) return std::nullopt;
    BigUInt upper = jk;
    upper.mul_u32(2);
    if (j < upper) return k;
    // j_{k+1} = j_k * alpha^{2k}
    for (uint32_t t = 0; t < 2 * k; ++t) jk.mul_u32(static_cast<uint32_t>(cfg.alpha));
  }
}

inline std::optional<uint32_t> locate_block_range(uint64_t j, const Config& cfg) {
  return locate_block_range(BigUInt(j), cfg);
}

// Interval path: float logs pick a candidate window, the decision itself is
// the exact integer test above. Kept as an independent cross-check of the
// range characterization.
inline std::optional<uint32_t> locate_block_interval(const BigUInt& j, const Config& cfg) {
  if (j.is_zero()) throw std::invalid_argument("series index j must be >= 1");
  double log_alpha_j = j.log2() / std::log2(static_cast<double>(cfg.alpha));
  double hi = 0.5 + std::sqrt(0.25 + std::max(0.0, log_alpha_j));
  auto center = static_cast<int64_t>(std::floor(hi));
  std::optional<uint32_t> found;
  for (int64_t c = center - 2; c <= center + 2; ++c) {
    if (c < 1) continue;
    if (detail::in_block(j, static_cast<uint32_t>(c), cfg.alpha)) {
      // the interval has width < 1, so at most one integer can pass
      found = static_cast<uint32_t>(c);
      break;
    }
  }
  return found;
}

inline std::optional<uint32_t> locate_block_interval(uint64_t j, const Config& cfg) {
  return locate_block_interval(BigUInt(j), cfg);
}

// log_alpha of the scalar factor of terms in block k:
// (1-k)(k(2+p)+2p)/(2p), equivalently -k(k-1)(1/2 + 1/p + 1/k).
inline double scaling_log(uint32_t k, double p) {
  double kd = static_cast<double>(k);
  return (1.0 - kd) * (kd * (2.0 + p) + 2.0 * p) / (2.0 * p);
}

inline double scaling_log(uint32_t k, const Config& cfg) { return scaling_log(k, cfg.p); }

// log_alpha of ||x^{(j)}||_p for j in block k: -(k-1)(k+2)/2, a half-integer
// independent of p. The integer product is exact in double for every k here.
inline double norm_log(uint32_t k) {
  int64_t kk = static_cast<int64_t>(k);
  return static_cast<double>(-(kk - 1) * (kk + 2)) / 2.0;
}

}  // namespace macphail
