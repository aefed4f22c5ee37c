#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "macphail/blocks.hpp"
#include "macphail/certify.hpp"
#include "macphail/config.hpp"
#include "macphail/log_domain.hpp"
#include "macphail/rng.hpp"
#include "macphail/sequence.hpp"

namespace macphail {

// G(S) = sup_{sigma subset of {1..n}} ||sum_{i in sigma} x_i|| / sum_i ||x_i||
// for a finite sequence S of lp vectors. The empty subset is included (it
// contributes 0 and never changes G for admissible S). Exhaustive evaluation
// walks subsets in Gray-code order with an incremental running sum;
// randomized evaluation is uniform subset sampling plus single-flip hill
// climbing and is reported strictly as a lower bound.

template <typename Scalar>
struct SparseVector {
  std::vector<std::pair<uint64_t, Scalar>> entries;  // (1-based coordinate, value)
};

template <typename Scalar>
struct FiniteSequence {
  std::vector<SparseVector<Scalar>> vectors;
  double p = 2.0;
};

enum class GMethod { exhaustive, randomized };

struct GReport {
  double value = 0.0;
  std::vector<uint32_t> subset;  // 1-based indices of an attaining subset
  GMethod method = GMethod::exhaustive;
  uint64_t trials = 0;
};

inline constexpr uint32_t kExhaustiveLimit = 24;

namespace detail {

template <typename Scalar>
struct CompactSequence {
  std::vector<std::vector<std::pair<uint32_t, Scalar>>> vectors;  // dense coords
  uint32_t dim = 0;
  double p = 2.0;
  double denominator = 0.0;  // sum of vector norms

  explicit CompactSequence(const FiniteSequence<Scalar>& seq) : p(seq.p) {
    std::map<uint64_t, uint32_t> remap;
    for (const auto& vec : seq.vectors)
      for (const auto& [coord, value] : vec.entries) {
        if (coord == 0) throw std::invalid_argument("coordinates are 1-based");
        remap.emplace(coord, 0);
      }
    for (auto& [coord, idx] : remap) idx = dim++;
    vectors.reserve(seq.vectors.size());
    for (const auto& vec : seq.vectors) {
      std::vector<std::pair<uint32_t, Scalar>> dense;
      dense.reserve(vec.entries.size());
      double norm_p = 0.0;
      for (const auto& [coord, value] : vec.entries) {
        dense.emplace_back(remap.at(coord), value);
        norm_p += abs_pow(value, p);
      }
      denominator += std::pow(norm_p, 1.0 / p);
      vectors.push_back(std::move(dense));
    }
  }

  double norm_of_subset(const std::vector<uint8_t>& mask) const {
    Eigen::Vector<Scalar, Eigen::Dynamic> acc =
        Eigen::Vector<Scalar, Eigen::Dynamic>::Zero(dim);
    for (size_t i = 0; i < vectors.size(); ++i)
      if (mask[i])
        for (const auto& [idx, value] : vectors[i]) acc[idx] += value;
    double norm_p = 0.0;
    for (uint32_t idx = 0; idx < dim; ++idx) norm_p += abs_pow(acc[idx], p);
    return std::pow(norm_p, 1.0 / p);
  }
};

template <typename Scalar>
void validate_sequence(const FiniteSequence<Scalar>& seq) {
  if (seq.vectors.empty()) throw std::invalid_argument("finite sequence must be nonempty");
  if (!(seq.p >= 1.0 && seq.p <= 2.0)) throw std::invalid_argument("p must lie in [1,2]");
  bool any_nonzero = false;
  for (const auto& vec : seq.vectors)
    for (const auto& [coord, value] : vec.entries)
      if (std::abs(value) != 0.0) any_nonzero = true;
  if (!any_nonzero)
    throw std::invalid_argument("all-zero sequence: G denominator vanishes");
}

inline std::vector<uint32_t> mask_to_subset(const std::vector<uint8_t>& mask) {
  std::vector<uint32_t> subset;
  for (size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) subset.push_back(static_cast<uint32_t>(i + 1));
  return subset;
}

}  // namespace detail

template <typename Scalar>
GReport g_exact(const FiniteSequence<Scalar>& seq) {
  detail::validate_sequence(seq);
  const uint32_t count = static_cast<uint32_t>(seq.vectors.size());
  if (count > kExhaustiveLimit)
    throw BudgetError("exhaustive G is limited to " + std::to_string(kExhaustiveLimit) +
                      " vectors");
  detail::CompactSequence<Scalar> compact(seq);
  const double p = compact.p;

  Eigen::Vector<Scalar, Eigen::Dynamic> acc =
      Eigen::Vector<Scalar, Eigen::Dynamic>::Zero(compact.dim);
  double norm_p = 0.0;
  uint64_t best_mask = 0;
  double best_norm_p = 0.0;  // empty subset
  const uint64_t total = uint64_t{1} << count;
  uint64_t gray = 0;
  for (uint64_t step = 1; step < total; ++step) {
    uint64_t next_gray = step ^ (step >> 1);
    uint32_t bit = static_cast<uint32_t>(std::countr_zero(step));
    bool adding = (next_gray >> bit) & 1;
    for (const auto& [idx, value] : compact.vectors[bit]) {
      norm_p -= abs_pow(acc[idx], p);
      if (adding)
        acc[idx] += value;
      else
        acc[idx] -= value;
      norm_p += abs_pow(acc[idx], p);
    }
    gray = next_gray;
    if (norm_p > best_norm_p) {
      best_norm_p = norm_p;
      best_mask = gray;
    }
  }
  GReport report;
  report.method = GMethod::exhaustive;
  std::vector<uint8_t> mask(count, 0);
  for (uint32_t i = 0; i < count; ++i) mask[i] = (best_mask >> i) & 1;
  report.subset = detail::mask_to_subset(mask);
  // recompute the winner from scratch; the Gray walk's running p-power can
  // carry ~2^n incremental rounding
  report.value = compact.norm_of_subset(mask) / compact.denominator;
  return report;
}

template <typename Scalar>
GReport g_random(const FiniteSequence<Scalar>& seq, uint64_t trials, uint64_t seed) {
  detail::validate_sequence(seq);
  GReport report;
  report.method = GMethod::randomized;
  report.trials = trials;
  if (trials == 0) return report;

  detail::CompactSequence<Scalar> compact(seq);
  const double p = compact.p;
  const uint32_t count = static_cast<uint32_t>(seq.vectors.size());

  std::vector<uint8_t> best_mask(count, 0);
  double best_norm_p = 0.0;
  for (uint64_t trial = 0; trial < trials; ++trial) {
    Xoshiro256pp rng(derive_seed(seed, trial));
    std::vector<uint8_t> mask(count);
    for (auto& b : mask) b = static_cast<uint8_t>(rng.next() & 1);
    Eigen::Vector<Scalar, Eigen::Dynamic> acc =
        Eigen::Vector<Scalar, Eigen::Dynamic>::Zero(compact.dim);
    for (uint32_t i = 0; i < count; ++i)
      if (mask[i])
        for (const auto& [idx, value] : compact.vectors[i]) acc[idx] += value;
    double norm_p = 0.0;
    for (uint32_t idx = 0; idx < compact.dim; ++idx)
      norm_p += abs_pow(acc[idx], p);

    for (uint32_t sweep = 0; sweep < 64; ++sweep) {
      bool improved = false;
      for (uint32_t i = 0; i < count; ++i) {
        double candidate = norm_p;
        for (const auto& [idx, value] : compact.vectors[i]) {
          candidate -= abs_pow(acc[idx], p);
          Scalar moved = mask[i] ? acc[idx] - value : acc[idx] + value;
          candidate += abs_pow(moved, p);
        }
        if (candidate > norm_p * (1.0 + 1e-12) + 1e-300) {
          for (const auto& [idx, value] : compact.vectors[i]) {
            norm_p -= abs_pow(acc[idx], p);
            if (mask[i])
              acc[idx] -= value;
            else
              acc[idx] += value;
            norm_p += abs_pow(acc[idx], p);
          }
          mask[i] ^= 1;
          improved = true;
        }
      }
      if (!improved) break;
    }
    if (norm_p > best_norm_p) {
      best_norm_p = norm_p;
      best_mask = mask;
    }
  }
  report.subset = detail::mask_to_subset(best_mask);
  report.value = compact.norm_of_subset(best_mask) / compact.denominator;
  return report;
}

// ---------------------------------------------------------------------------
// Blocks of the construction as finite sequences
// ---------------------------------------------------------------------------

// Analytic bound on G(block k): numerator <= alpha^{1-k} (the block dual-sum
// bound), denominator = j_k * j_k^{-(1/2+1/k)}; in log_alpha units the
// quotient exponent collapses to (1-k) - (k-1)(k-2)/2.
inline double block_g_bound_log(uint32_t k) {
  int64_t kk = static_cast<int64_t>(k);
  return static_cast<double>(1 - kk) - static_cast<double>((kk - 1) * (kk - 2)) / 2.0;
}

inline double block_g_bound(uint32_t k, const Config& cfg) {
  return pow_alpha(cfg.alpha, block_g_bound_log(k));
}

template <typename Scalar>
FiniteSequence<Scalar> block_finite_sequence(uint32_t k, const Config& cfg,
                                             const MaterializationPolicy& policy = {}) {
  BigUInt jk = block_start(k, cfg.alpha);
  if (!jk.fits_uint64() || jk.to_uint64() > policy.dense_limit)
    throw BudgetError("block " + std::to_string(k) + " cannot be materialized densely");
  uint64_t n = jk.to_uint64();
  FiniteSequence<Scalar> seq;
  seq.p = cfg.p;
  seq.vectors.reserve(n);
  for (uint64_t r = 1; r <= n; ++r) {
    Term term = build_term(jk + BigUInt(r - 1), cfg, policy);
    Eigen::VectorXcd coeffs = term_dense(term, policy);
    SparseVector<Scalar> vec;
    vec.entries.reserve(n);
    for (uint64_t s = 0; s < n; ++s) {
      uint64_t coord = n + s;  // j_k + s - 1 with s 1-based
      if constexpr (std::is_same_v<Scalar, std::complex<double>>)
        vec.entries.emplace_back(coord, coeffs[static_cast<Eigen::Index>(s)]);
      else
        vec.entries.emplace_back(coord, coeffs[static_cast<Eigen::Index>(s)].real());
    }
    seq.vectors.push_back(std::move(vec));
  }
  return seq;
}

// Randomized lower-bound search over subsets of one block's terms, streamed
// against the kernel so nothing above the dense limit is materialized. Flip
// proposals touch the whole block support, so candidate moves per trial are
// capped (kBlockFlipCandidates random rows per sweep).
inline constexpr uint64_t kBlockInitialRowCap = 512;
inline constexpr uint64_t kBlockFlipCandidates = 32;
inline constexpr uint32_t kBlockSweeps = 4;

inline GReport g_block_random(uint32_t k, const Config& cfg, uint64_t trials, uint64_t seed,
                              const MaterializationPolicy& policy = {}) {
  BigUInt jk = block_start(k, cfg.alpha);
  if (!jk.fits_uint64() || jk.to_uint64() > policy.stream_limit)
    throw BudgetError("block " + std::to_string(k) + " exceeds the stream limit");
  const uint64_t n = jk.to_uint64();
  const double p = cfg.p;
  // denominator: j_k terms of norm alpha^{norm_log(k)} each
  const double den_log = static_cast<double>(k) * (k - 1.0) + norm_log(k);

  GReport report;
  report.method = GMethod::randomized;
  report.trials = trials;
  if (trials == 0) return report;

  const bool complex_field = cfg.field == Field::complex_dft;
  DftKernel dft(complex_field ? n : 1);
  WalshKernel walsh(complex_field ? 0 : detail::walsh_levels(n));

  Eigen::VectorXcd acc(static_cast<Eigen::Index>(n));
  std::vector<int8_t> buf;
  auto add_row = [&](uint64_t r, double sign) {
    if (complex_field) {
      dft.for_each_in_row(r, [&](uint64_t s, std::complex<double> v) {
        acc[static_cast<Eigen::Index>(s - 1)] += sign * v;
      });
    } else {
      walsh.row(r, buf);
      for (uint64_t s = 0; s < n; ++s)
        acc[static_cast<Eigen::Index>(s)] += sign * static_cast<double>(buf[s]);
    }
  };
  auto sum_p_with_flip = [&](uint64_t r, double sign) {
    // sum_s |acc_s + sign*a_{r,s}|^p without committing the flip
    double total = 0.0;
    if (complex_field) {
      dft.for_each_in_row(r, [&](uint64_t s, std::complex<double> v) {
        total += abs_pow(acc[static_cast<Eigen::Index>(s - 1)] + sign * v, p);
      });
    } else {
      walsh.row(r, buf);
      for (uint64_t s = 0; s < n; ++s)
        total += abs_pow(acc[static_cast<Eigen::Index>(s)] +
                             sign * static_cast<double>(buf[s]), p);
    }
    return total;
  };
  auto sum_p_current = [&]() {
    double total = 0.0;
    for (Eigen::Index i = 0; i < acc.size(); ++i) total += abs_pow(acc[i], p);
    return total;
  };

  double best_value = 0.0;
  std::vector<uint32_t> best_subset;
  for (uint64_t trial = 0; trial < trials; ++trial) {
    Xoshiro256pp rng(derive_seed(seed, trial));
    std::vector<uint8_t> mask(n, 0);
    acc.setZero();
    if (n <= 2 * kBlockInitialRowCap) {
      for (uint64_t r = 1; r <= n; ++r)
        if (rng.next() & 1) {
          mask[r - 1] = 1;
          add_row(r, 1.0);
        }
    } else {
      // row additions cost O(n) each; scale the seed subset down with n
      uint64_t init_cap = std::clamp<uint64_t>((uint64_t{1} << 25) / n, 1, kBlockInitialRowCap);
      uint64_t rows = 1 + rng.below(init_cap);
      for (uint64_t c = 0; c < rows; ++c) {
        uint64_t r = rng.below(n) + 1;
        if (mask[r - 1]) continue;
        mask[r - 1] = 1;
        add_row(r, 1.0);
      }
    }
    double sum_p = sum_p_current();
    const uint64_t candidates =
        std::min<uint64_t>(n, std::clamp<uint64_t>((uint64_t{1} << 24) / n, 8,
                                                   kBlockFlipCandidates));
    for (uint32_t sweep = 0; sweep < kBlockSweeps; ++sweep) {
      bool improved = false;
      for (uint64_t c = 0; c < candidates; ++c) {
        uint64_t r = n <= candidates ? c + 1 : rng.below(n) + 1;
        double sign = mask[r - 1] ? -1.0 : 1.0;
        double flipped = sum_p_with_flip(r, sign);
        if (flipped > sum_p * (1.0 + 1e-12)) {
          add_row(r, sign);
          mask[r - 1] ^= 1;
          sum_p = flipped;
          improved = true;
        }
      }
      if (!improved) break;
    }
    if (sum_p > 0.0) {
      double value_log = scaling_log(k, cfg) + to_log_alpha(std::log(sum_p), cfg.alpha) / p -
                         den_log;
      double value = pow_alpha(cfg.alpha, value_log);
      if (value > best_value) {
        best_value = value;
        best_subset = detail::mask_to_subset(mask);
      }
    }
  }
  report.value = best_value;
  report.subset = std::move(best_subset);
  return report;
}

// ---------------------------------------------------------------------------
// The decreasing upper-bound curve for mu(lp)
// ---------------------------------------------------------------------------

struct MuCurveRow {
  uint32_t k = 0;
  double bound = 0.0;
  double bound_log_alpha = 0.0;
  std::string method;            // "exact", "randomized" or "analytic"
  std::optional<double> observed;
  uint64_t trials = 0;
};

// Per block: the analytic bound; exact G for k <= 2 (16 subsets at most),
// a randomized lower estimate for 3 <= k <= 5, analytic only beyond. The
// bound column decreases strictly toward 0, which is the constructive
// witness that mu(lp) = 0.
inline std::vector<MuCurveRow> mu_upper_curve(uint32_t k_max, const Config& cfg,
                                              uint64_t trials, uint64_t seed,
                                              const MaterializationPolicy& policy = {}) {
  std::vector<MuCurveRow> curve;
  for (uint32_t k = 1; k <= k_max; ++k) {
    MuCurveRow row;
    row.k = k;
    row.bound_log_alpha = block_g_bound_log(k);
    row.bound = block_g_bound(k, cfg);
    if (k <= 2) {
      row.method = "exact";
      GReport report =
          cfg.field == Field::complex_dft
              ? g_exact(block_finite_sequence<std::complex<double>>(k, cfg, policy))
              : g_exact(block_finite_sequence<double>(k, cfg, policy));
      row.observed = report.value;
    } else if (k <= 5) {
      row.method = "randomized";
      // each trial streams the whole block; keep total work block-independent
      uint64_t n = block_start(k, cfg.alpha).to_uint64();
      uint64_t block_trials =
          std::min<uint64_t>(trials, std::max<uint64_t>(4, (uint64_t{1} << 22) / n));
      GReport report = g_block_random(k, cfg, block_trials, derive_seed(seed, k), policy);
      row.observed = report.value;
      row.trials = block_trials;
    } else {
      row.method = "analytic";
    }
    curve.push_back(std::move(row));
  }
  return curve;
}

}  // namespace macphail
