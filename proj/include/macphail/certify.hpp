#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "macphail/blocks.hpp"
#include "macphail/config.hpp"
#include "macphail/kernels.hpp"
#include "macphail/log_domain.hpp"
#include "macphail/rng.hpp"
#include "macphail/sequence.hpp"

namespace macphail {

// Certification of unconditional summability: sampled dual functionals
// against the per-block bound alpha^{1-k}, exact geometric tail
// certificates, and the finite-subset criterion. The supremum over the
// dual ball is never claimed computed; reports pair a sampled lower
// estimate with the analytic upper bound.

struct DualSample {
  BlockVector phi;       // coefficients on the block support, s = 1..j_k
  uint64_t seed = 0;     // provenance
  double pstar = 2.0;
};

namespace detail {

// normalize so ||phi||_{p*} = 1; p* = inf uses the max modulus
inline void normalize_dual(Eigen::VectorXcd& v, double pstar) {
  double norm;
  if (std::isinf(pstar)) {
    norm = v.cwiseAbs().maxCoeff();
  } else {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) acc += abs_pow(v[i], pstar);
    norm = std::pow(acc, 1.0 / pstar);
  }
  if (norm == 0.0) {
    v[0] = 1.0;
    return;
  }
  v /= norm;
}

}  // namespace detail

// A vector with ||phi||_{p*} = 1, deterministic in the seed. Finite p*
// draws symmetric gaussian entries and normalizes; p* = inf draws entries
// uniform on the unit disc (complex) or sign * uniform (real) and rescales
// the largest modulus to 1.
inline DualSample random_dual_unit(uint64_t n, double pstar, uint64_t seed, Field field) {
  Xoshiro256pp rng(seed);
  Eigen::VectorXcd v(static_cast<Eigen::Index>(n));
  if (std::isinf(pstar)) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
      v[i] = field == Field::complex_dft ? rng.unit_disc()
                                         : std::complex<double>(rng.uniform_sym(), 0.0);
  } else {
    for (Eigen::Index i = 0; i < v.size(); ++i)
      v[i] = field == Field::complex_dft ? rng.normal_complex()
                                         : std::complex<double>(rng.normal(), 0.0);
  }
  detail::normalize_dual(v, pstar);
  DualSample sample;
  sample.phi.dense = std::move(v);
  sample.seed = seed;
  sample.pstar = pstar;
  return sample;
}

// Sparse variant with `support_size` distinct coordinates; this is what the
// 2^20-dimensional block spot checks use (dense dual sums there cost 2^40
// multiply-adds). The bound holds for every unit functional, sparse included.
inline DualSample random_dual_unit_sparse(uint64_t n, double pstar, uint64_t support_size,
                                          uint64_t seed, Field field) {
  Xoshiro256pp rng(seed);
  support_size = std::min(support_size, n);
  std::set<uint64_t> picked;
  while (picked.size() < support_size) picked.insert(rng.below(n) + 1);
  Eigen::VectorXcd values(static_cast<Eigen::Index>(support_size));
  if (std::isinf(pstar)) {
    for (Eigen::Index i = 0; i < values.size(); ++i)
      values[i] = field == Field::complex_dft ? rng.unit_disc()
                                              : std::complex<double>(rng.uniform_sym(), 0.0);
  } else {
    for (Eigen::Index i = 0; i < values.size(); ++i)
      values[i] = field == Field::complex_dft ? rng.normal_complex()
                                              : std::complex<double>(rng.normal(), 0.0);
  }
  detail::normalize_dual(values, pstar);
  DualSample sample;
  sample.phi.sparse = true;
  sample.phi.support.reserve(support_size);
  Eigen::Index idx = 0;
  for (uint64_t s : picked) sample.phi.support.emplace_back(s, values[idx++]);
  sample.seed = seed;
  sample.pstar = pstar;
  return sample;
}

// sum over block k of |phi(x^{(j)})| via the reindexed double sum
// alpha^{scaling_log} * sum_r |sum_s phi_s a_{rs}|; bounded by alpha^{1-k}.
inline double block_dual_sum(uint32_t k, const DualSample& sample, const Config& cfg,
                             const MaterializationPolicy& policy = {}) {
  BigUInt jk = block_start(k, cfg.alpha);
  if (!jk.fits_uint64() || jk.to_uint64() > policy.stream_limit)
    throw BudgetError("block " + std::to_string(k) + " exceeds the stream limit");
  uint64_t n = jk.to_uint64();
  double scale = pow_alpha(cfg.alpha, scaling_log(k, cfg));
  double row_sum;
  if (cfg.field == Field::complex_dft) {
    DftKernel kernel(n);
    if (sample.phi.sparse) {
      row_sum = dual_row_sum_sparse(kernel, sample.phi.support);
    } else {
      row_sum = dual_row_sum(kernel, sample.phi.dense);
    }
  } else {
    WalshKernel kernel(detail::walsh_levels(n));
    if (sample.phi.sparse) {
      std::vector<std::pair<uint64_t, double>> support;
      support.reserve(sample.phi.support.size());
      for (const auto& [s, v] : sample.phi.support) support.emplace_back(s, v.real());
      row_sum = dual_row_sum_sparse(kernel, support);
    } else {
      row_sum = dual_row_sum(kernel, sample.phi.dense.real());
    }
  }
  return scale * row_sum;
}

struct BlockSupEstimate {
  uint32_t k = 0;
  uint64_t trials = 0;
  double observed = 0.0;  // sampled lower estimate of the true supremum
  double bound = 0.0;     // analytic upper bound alpha^{1-k}
};

inline double block_sup_bound(uint32_t k, const Config& cfg) {
  return pow_alpha(cfg.alpha, 1.0 - static_cast<double>(k));
}

inline constexpr uint64_t kSparseSupport = 64;

// Max of block_dual_sum over `trials` sampled unit functionals, paired with
// the analytic bound. Per-trial seeds derive from (seed, trial) so parallel
// and serial runs agree. Large blocks switch to sparse samples.
inline BlockSupEstimate estimate_block_sup(uint32_t k, uint64_t trials, uint64_t seed,
                                           const Config& cfg,
                                           const MaterializationPolicy& policy = {}) {
  BlockSupEstimate est;
  est.k = k;
  est.trials = trials;
  est.bound = block_sup_bound(k, cfg);
  BigUInt jk = block_start(k, cfg.alpha);
  if (!jk.fits_uint64() || jk.to_uint64() > policy.stream_limit)
    throw BudgetError("block " + std::to_string(k) + " exceeds the stream limit");
  uint64_t n = jk.to_uint64();
  bool sparse = n > policy.dense_limit;
  for (uint64_t trial = 0; trial < trials; ++trial) {
    uint64_t trial_seed = derive_seed(seed, trial);
    DualSample sample = sparse
        ? random_dual_unit_sparse(n, cfg.pstar, kSparseSupport, trial_seed, cfg.field)
        : random_dual_unit(n, cfg.pstar, trial_seed, cfg.field);
    sample.phi.block_k = k;
    est.observed = std::max(est.observed, block_dual_sum(k, sample, cfg, policy));
  }
  return est;
}

// ---------------------------------------------------------------------------
// Geometric tail certificates and the finite-subset criterion
// ---------------------------------------------------------------------------

struct TailCertificate {
  uint32_t start_block = 1;
  double bound = 0.0;           // sum_{k>=n} alpha^{1-k} = alpha^{2-n}/(alpha-1)
  double bound_log_alpha = 0.0;
};

inline TailCertificate tail_bound(uint32_t n, const Config& cfg) {
  if (n < 1) throw std::invalid_argument("tail certificates start at block 1");
  TailCertificate cert;
  cert.start_block = n;
  cert.bound = pow_alpha(cfg.alpha, 2.0 - static_cast<double>(n)) /
               static_cast<double>(cfg.alpha - 1);
  cert.bound_log_alpha = (2.0 - static_cast<double>(n)) -
                         to_log_alpha(std::log(static_cast<double>(cfg.alpha - 1)), cfg.alpha);
  return cert;
}

// smallest n with tail_bound(n) < delta
inline uint32_t delta_threshold(double delta, const Config& cfg) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  for (uint32_t n = 1;; ++n) {
    if (tail_bound(n, cfg).bound < delta) return n;
    if (n > 4200) throw std::invalid_argument("delta below double range");
  }
}

// ||sum_{j in M} x^{(j)}||_p, exact per-block accumulation. Blocks have
// disjoint supports, so p-th powers add across blocks; within a block the
// selected kernel rows are accumulated coordinatewise and then normed.
// Duplicate indices are collapsed (M is a set); zero terms contribute nothing.
inline double finite_subset_norm(const std::vector<BigUInt>& M, const Config& cfg,
                                 const MaterializationPolicy& policy = {}) {
  // group row indices by block
  std::vector<std::pair<uint32_t, std::vector<uint64_t>>> blocks;
  {
    std::set<std::pair<uint32_t, uint64_t>> seen;
    for (const BigUInt& j : M) {
      auto k = locate_block_range(j, cfg);
      if (!k) continue;
      BigUInt jk = block_start(*k, cfg.alpha);
      if (!jk.fits_uint64() || jk.to_uint64() > policy.stream_limit)
        throw BudgetError("block " + std::to_string(*k) + " exceeds the stream limit");
      BigUInt row = j - jk + BigUInt(1);
      seen.emplace(*k, row.to_uint64());
    }
    for (const auto& [k, row] : seen) {
      if (blocks.empty() || blocks.back().first != k) blocks.push_back({k, {}});
      blocks.back().second.push_back(row);
    }
  }
  if (blocks.empty()) return 0.0;

  const double p = cfg.p;
  const double ln_alpha = ln_of_alpha(cfg.alpha);
  LogSum total_p;  // sum over blocks of ||block part||_p^p, in logs
  for (const auto& [k, rows] : blocks) {
    uint64_t n = block_start(k, cfg.alpha).to_uint64();
    double sum_p = 0.0;
    if (cfg.field == Field::complex_dft) {
      DftKernel kernel(n);
      Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n));
      for (uint64_t r : rows)
        kernel.for_each_in_row(r, [&](uint64_t s, std::complex<double> v) {
          acc[static_cast<Eigen::Index>(s - 1)] += v;
        });
      for (Eigen::Index i = 0; i < acc.size(); ++i) sum_p += abs_pow(acc[i], p);
    } else {
      WalshKernel kernel(detail::walsh_levels(n));
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
      std::vector<int8_t> buf;
      for (uint64_t r : rows) {
        kernel.row(r, buf);
        for (uint64_t s = 0; s < n; ++s) acc[static_cast<Eigen::Index>(s)] += buf[s];
      }
      for (Eigen::Index i = 0; i < acc.size(); ++i) sum_p += abs_pow(acc[i], p);
    }
    if (sum_p > 0.0)
      total_p.add_ln(p * scaling_log(k, cfg) * ln_alpha + std::log(sum_p));
  }
  if (total_p.empty()) return 0.0;
  return std::exp(total_p.ln / p);
}

inline double finite_subset_norm(const std::vector<uint64_t>& M, const Config& cfg,
                                 const MaterializationPolicy& policy = {}) {
  std::vector<BigUInt> big;
  big.reserve(M.size());
  for (uint64_t j : M) big.emplace_back(j);
  return finite_subset_norm(big, cfg, policy);
}

}  // namespace macphail
