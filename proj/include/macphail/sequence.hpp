#pragma once

#include <Eigen/Core>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>

#include "macphail/blocks.hpp"
#include "macphail/config.hpp"
#include "macphail/kernels.hpp"
#include "macphail/log_domain.hpp"
#include "macphail/rational.hpp"

namespace macphail {

// Terms of the series. x^{(j)} is supported on coordinates j_k..2j_k-1 when
// j falls in block k, with coefficient alpha^{scaling_log} * a_{r,s} at
// column s = m - j_k + 1 (r = j - j_k + 1), and x^{(j)} = 0 between blocks.
// Scalings are kept in log_alpha units; the linear factor leaves double
// range around block 6.

struct MaterializationPolicy {
  uint64_t dense_limit = uint64_t{1} << 12;   // blocks this size may go dense
  uint64_t stream_limit = uint64_t{1} << 20;  // larger blocks are analytic-only
  enum class Mode { dense, streamed };
  Mode mode = Mode::streamed;
};

struct Term {
  Config cfg;
  BigUInt j;
  uint32_t k = 0;          // 0 marks the zero term
  BigUInt row;             // r = j - j_k + 1, valid when k > 0
  BigUInt support_offset;  // j_k
  double scaling_log = 0.0;

  bool is_zero() const { return k == 0; }
};

inline Term build_term(const BigUInt& j, const Config& cfg,
                       const MaterializationPolicy& = {}) {
  Term term;
  term.cfg = cfg;
  term.j = j;
  auto block = locate_block_range(j, cfg);
  if (!block) return term;  // zero term, empty support
  term.k = *block;
  term.support_offset = block_start(term.k, cfg.alpha);
  term.row = j - term.support_offset + BigUInt(1);
  term.scaling_log = scaling_log(term.k, cfg);
  return term;
}

inline Term build_term(uint64_t j, const Config& cfg, const MaterializationPolicy& policy = {}) {
  return build_term(BigUInt(j), cfg, policy);
}

namespace detail {

inline uint64_t block_size_checked(const Term& term, const MaterializationPolicy& policy) {
  if (!term.support_offset.fits_uint64())
    throw BudgetError("block " + std::to_string(term.k) + " is analytic-only");
  uint64_t n = term.support_offset.to_uint64();
  if (n > policy.stream_limit)
    throw BudgetError("block " + std::to_string(term.k) + " exceeds the stream limit");
  return n;
}

inline uint32_t walsh_levels(uint64_t n) {
  uint32_t m = 0;
  while ((uint64_t{1} << m) < n) ++m;
  return m;
}

}  // namespace detail

// m-th lp coordinate of x^{(j)}; zero off support. Real-field terms come
// back with zero imaginary part.
inline std::complex<double> term_coefficient(const Term& term, const BigUInt& m,
                                             const MaterializationPolicy& policy = {}) {
  if (term.is_zero()) return 0.0;
  if (m < term.support_offset) return 0.0;
  BigUInt s_big = m - term.support_offset + BigUInt(1);
  uint64_t n = detail::block_size_checked(term, policy);
  if (!s_big.fits_uint64()) return 0.0;
  uint64_t s = s_big.to_uint64();
  if (s > n) return 0.0;
  uint64_t r = term.row.to_uint64();
  double scale = pow_alpha(term.cfg.alpha, term.scaling_log);
  if (term.cfg.field == Field::complex_dft) return scale * dft_entry(n, r, s);
  return std::complex<double>(scale * walsh_entry(detail::walsh_levels(n), r, s), 0.0);
}

inline std::complex<double> term_coefficient(const Term& term, uint64_t m,
                                             const MaterializationPolicy& policy = {}) {
  return term_coefficient(term, BigUInt(m), policy);
}

// Dense coefficient vector over the block support (s = 1..j_k).
inline Eigen::VectorXcd term_dense(const Term& term, const MaterializationPolicy& policy = {}) {
  if (term.is_zero()) return Eigen::VectorXcd();
  uint64_t n = detail::block_size_checked(term, policy);
  if (n > policy.dense_limit)
    throw BudgetError("dense materialization above the dense limit");
  Eigen::VectorXcd out(static_cast<Eigen::Index>(n));
  uint64_t r = term.row.to_uint64();
  double scale = pow_alpha(term.cfg.alpha, term.scaling_log);
  if (term.cfg.field == Field::complex_dft) {
    DftKernel kernel(n);
    kernel.for_each_in_row(r, [&](uint64_t s, std::complex<double> v) {
      out[static_cast<Eigen::Index>(s - 1)] = scale * v;
    });
  } else {
    WalshKernel kernel(detail::walsh_levels(n));
    std::vector<int8_t> buf;
    kernel.row(r, buf);
    for (uint64_t s = 0; s < n; ++s)
      out[static_cast<Eigen::Index>(s)] = scale * static_cast<double>(buf[s]);
  }
  return out;
}

// log_alpha of the lp norm, accumulated by streaming |kernel entry|^p; the
// scaling stays symbolic so the result is finite for every streamable block.
inline double term_norm_direct_log(const Term& term, const MaterializationPolicy& policy = {}) {
  if (term.is_zero()) return -std::numeric_limits<double>::infinity();
  uint64_t n = detail::block_size_checked(term, policy);
  uint64_t r = term.row.to_uint64();
  const double p = term.cfg.p;
  double sum_p = 0.0;
  if (policy.mode == MaterializationPolicy::Mode::dense && n <= policy.dense_limit) {
    Eigen::VectorXcd coeffs = term_dense(term, policy);
    double scale = pow_alpha(term.cfg.alpha, term.scaling_log);
    for (Eigen::Index idx = 0; idx < coeffs.size(); ++idx)
      sum_p += abs_pow(std::abs(coeffs[idx]) / scale, p);
  } else if (term.cfg.field == Field::complex_dft) {
    DftKernel kernel(n);
    kernel.for_each_in_row(r, [&](uint64_t, std::complex<double> v) {
      sum_p += abs_pow(v, p);
    });
  } else {
    WalshKernel kernel(detail::walsh_levels(n));
    std::vector<int8_t> buf;
    kernel.row(r, buf);
    for (uint64_t s = 0; s < n; ++s)
      sum_p += abs_pow(static_cast<double>(buf[s]), p);
  }
  return term.scaling_log + to_log_alpha(std::log(sum_p), term.cfg.alpha) / p;
}

inline double term_norm_direct(const Term& term, const MaterializationPolicy& policy = {}) {
  if (term.is_zero()) return 0.0;
  return pow_alpha(term.cfg.alpha, term_norm_direct_log(term, policy));
}

// ---------------------------------------------------------------------------
// Power series sum ||x^{(j)}||^r  = sum_k alpha^{k(k-1)(1 - r/2 - r/k)}
// ---------------------------------------------------------------------------

// log_alpha of block k's contribution, arranged so r = 2 gives -2(k-1)
// with no rounding: k(k-1) - r * (k-1)(k+2)/2, all integer pieces exact.
inline double power_term_log(double r, uint32_t k) {
  int64_t kk = static_cast<int64_t>(k);
  double quad = static_cast<double>(kk * (kk - 1));
  double half = static_cast<double>((kk - 1) * (kk + 2)) / 2.0;
  return quad - r * half;
}

// First block with a strictly positive growth exponent:
// k0 = floor(2r/(2-r)) + 1, decided in exact rational arithmetic.
inline uint64_t first_growth_block(const Rational& r) {
  if (r.num <= 0 || r.num >= 2 * r.den)
    throw std::invalid_argument("power exponent must satisfy 0 < r < 2");
  // 2r/(2-r) = 2*num / (2*den - num); the (k-1) factor of the exponent
  // keeps block 1 flat regardless of r, hence the floor at 2
  unsigned __int128 two_num = static_cast<unsigned __int128>(r.num) * 2;
  unsigned __int128 gap = static_cast<unsigned __int128>(2 * r.den - r.num);
  uint64_t threshold = static_cast<uint64_t>(two_num / gap) + 1;
  return std::max<uint64_t>(threshold, 2);
}

struct DivergenceWitness {
  uint64_t k0 = 0;             // first block with a growing term
  uint64_t witness_block = 0;  // smallest K with partial sum > threshold
  double partial_log_alpha = 0.0;
  double threshold_log_alpha = 0.0;
};

// Smallest K with sum_{k<=K} alpha^{power_term_log(r,k)} > threshold,
// accumulated entirely in the log domain. Always terminates for r < 2.
inline DivergenceWitness divergence_witness(const Rational& r, double threshold,
                                            const Config& cfg) {
  if (!(threshold > 0.0)) throw std::invalid_argument("threshold must be positive");
  DivergenceWitness out;
  out.k0 = first_growth_block(r);
  out.threshold_log_alpha = to_log_alpha(std::log(threshold), cfg.alpha);
  const double ln_alpha = ln_of_alpha(cfg.alpha);
  const double r_value = r.value();
  LogSum acc;
  for (uint64_t k = 1;; ++k) {
    acc.add_ln(power_term_log(r_value, static_cast<uint32_t>(k)) * ln_alpha);
    double log_alpha_sum = to_log_alpha(acc.ln, cfg.alpha);
    if (log_alpha_sum > out.threshold_log_alpha) {
      out.witness_block = k;
      out.partial_log_alpha = log_alpha_sum;
      return out;
    }
  }
}

// ---------------------------------------------------------------------------
// Functionals against terms
// ---------------------------------------------------------------------------

// A dual vector living on one block's support, coefficients indexed by
// s = 1..j_k (coordinate j_k + s - 1). Large blocks use the sparse form.
struct BlockVector {
  uint32_t block_k = 0;
  Eigen::VectorXcd dense;
  std::vector<std::pair<uint64_t, std::complex<double>>> support;  // (s, value)
  bool sparse = false;
};

// phi(x^{(j)}), streamed. Functionals on a different block pair to zero by
// support disjointness; that is a value, not an error.
inline std::complex<double> apply_functional(const BlockVector& phi, const Term& term,
                                             const MaterializationPolicy& policy = {}) {
  if (term.is_zero() || phi.block_k != term.k) return 0.0;
  uint64_t n = detail::block_size_checked(term, policy);
  uint64_t r = term.row.to_uint64();
  double scale = pow_alpha(term.cfg.alpha, term.scaling_log);
  std::complex<double> acc = 0.0;
  if (phi.sparse) {
    if (term.cfg.field == Field::complex_dft) {
      DftKernel kernel(n);
      for (const auto& [s, v] : phi.support) acc += v * kernel.entry(r, s);
    } else {
      uint32_t m = detail::walsh_levels(n);
      for (const auto& [s, v] : phi.support)
        acc += v * static_cast<double>(walsh_entry(m, r, s));
    }
    return scale * acc;
  }
  if (policy.mode == MaterializationPolicy::Mode::dense && n <= policy.dense_limit) {
    Eigen::VectorXcd coeffs = term_dense(term, policy);
    return phi.dense.cwiseProduct(coeffs).sum();
  }
  if (term.cfg.field == Field::complex_dft) {
    DftKernel kernel(n);
    kernel.for_each_in_row(r, [&](uint64_t s, std::complex<double> v) {
      acc += phi.dense[static_cast<Eigen::Index>(s - 1)] * v;
    });
  } else {
    WalshKernel kernel(detail::walsh_levels(n));
    std::vector<int8_t> buf;
    kernel.row(r, buf);
    for (uint64_t s = 0; s < n; ++s)
      acc += phi.dense[static_cast<Eigen::Index>(s)] * static_cast<double>(buf[s]);
  }
  return scale * acc;
}

}  // namespace macphail
