#pragma once

#include <Eigen/Core>
#include <bit>
#include <cassert>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <numbers>
#include <vector>

#include "macphail/rng.hpp"

namespace macphail {

// The two unimodular kernel families behind the constructions:
//   - complex DFT entries a_{rs} = exp(2*pi*i*r*s/n), 1-based indices;
//   - real Walsh +-1 entries a_{ij} = g_j on the open dyadic interval
//     ((i-1)/2^m, i/2^m), with the level-major enumeration g_1 = f_0,
//     g_2 = f_1, then f_l^{(1)}..f_l^{(2^{l-1})} per level l >= 2.
// Matrices are represented by entry generators; dense materialization is a
// caller decision (blocks above 2^12 are streamed, block 5 has n = 2^20).

inline std::complex<double> dft_root(uint64_t n, uint64_t m) {
  // exp(2*pi*i*m/n) with the argument reduced to (-pi, pi]
  int64_t reduced = static_cast<int64_t>(m);
  if (reduced > static_cast<int64_t>(n / 2)) reduced -= static_cast<int64_t>(n);
  return std::polar(1.0, (2.0 * std::numbers::pi / static_cast<double>(n)) *
                             static_cast<double>(reduced));
}

inline std::complex<double> dft_entry(uint64_t n, uint64_t r, uint64_t s) {
  assert(r >= 1 && r <= n && s >= 1 && s <= n);
  uint64_t m = static_cast<uint64_t>(
      (static_cast<unsigned __int128>(r) * s) % n);
  return dft_root(n, m);
}

class DftKernel {
 public:
  explicit DftKernel(uint64_t n) : n_(n) {
    assert(n >= 1);
    auto table = std::make_shared<std::vector<std::complex<double>>>();
    table->reserve(n);
    for (uint64_t m = 0; m < n; ++m) table->push_back(dft_root(n, m));
    roots_ = std::move(table);
  }

  uint64_t size() const { return n_; }

  std::complex<double> entry(uint64_t r, uint64_t s) const {
    assert(r >= 1 && r <= n_ && s >= 1 && s <= n_);
    uint64_t m = static_cast<uint64_t>(
        (static_cast<unsigned __int128>(r) * s) % n_);
    return (*roots_)[m];
  }

  // visit a_{r,1..n} in order; the phase index steps by r mod n per column
  template <class Visit>
  void for_each_in_row(uint64_t r, Visit&& visit) const {
    const auto& roots = *roots_;
    uint64_t step = r % n_;
    uint64_t idx = step;  // s = 1
    for (uint64_t s = 1; s <= n_; ++s) {
      visit(s, roots[idx]);
      idx += step;
      if (idx >= n_) idx -= n_;
    }
  }

  Eigen::MatrixXcd dense() const {
    Eigen::MatrixXcd out(n_, n_);
    for (uint64_t r = 1; r <= n_; ++r)
      for_each_in_row(r, [&](uint64_t s, std::complex<double> v) {
        out(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(s - 1)) = v;
      });
    return out;
  }

 private:
  uint64_t n_;
  std::shared_ptr<const std::vector<std::complex<double>>> roots_;
};

namespace detail {

// Quarter-interval values of the two displayed level-2 Walsh functions.
inline constexpr int kWalshLevel2[2][4] = {
    {1, -1, -1, 1},   // f_2^{(1)}
    {1, -1, 1, -1},   // f_2^{(2)}
};

// f_level^{(t)} on the open interval ((i-1)/2^g, i/2^g). Levels 0..2 come
// from the displayed definitions; higher levels use the two recursion
// branches, whose second-half factors are (-1)^{k+1} for t = 2k-1 and
// (-1)^k for t = 2k. The maps x -> 2x and x -> 2x-1 send interval i of the
// 2^g grid to interval i, resp. i - 2^{g-1}, of the 2^{g-1} grid.
inline int walsh_eval(uint32_t level, uint64_t t, uint64_t i, uint32_t g) {
  if (level == 0) return 1;
  if (level == 1) return i <= (uint64_t{1} << (g - 1)) ? 1 : -1;
  if (level == 2) {
    uint64_t quarter = (i - 1) >> (g - 2);
    return kWalshLevel2[t - 1][quarter];
  }
  uint64_t half = uint64_t{1} << (g - 1);
  uint64_t parent = (t + 1) / 2;
  if (i <= half) return walsh_eval(level - 1, parent, i, g - 1);
  int sign;
  if (t & 1)
    sign = (parent % 2 == 1) ? 1 : -1;   // (-1)^{k+1}
  else
    sign = (parent % 2 == 0) ? 1 : -1;   // (-1)^k
  return sign * walsh_eval(level - 1, parent, i - half, g - 1);
}

}  // namespace detail

inline int walsh_entry(uint32_t m, uint64_t i, uint64_t j) {
  assert(i >= 1 && i <= (uint64_t{1} << m) && j >= 1 && j <= (uint64_t{1} << m));
  if (j == 1) return 1;
  if (j == 2) return detail::walsh_eval(1, 1, i, m);
  uint32_t level = static_cast<uint32_t>(std::bit_width(j - 1));
  uint64_t t = j - (uint64_t{1} << (level - 1));
  return detail::walsh_eval(level, t, i, m);
}

class WalshKernel {
 public:
  explicit WalshKernel(uint32_t m) : m_(m) {}

  uint32_t level_count() const { return m_; }
  uint64_t size() const { return uint64_t{1} << m_; }

  int entry(uint64_t i, uint64_t j) const {
    int v = walsh_entry(m_, i, j);
    if (fault_i_ == i && fault_j_ == j) v = -v;
    return v;
  }

  // Test hook: flip the sign of one entry so detectors can be exercised.
  void inject_fault(uint64_t i, uint64_t j) {
    fault_i_ = i;
    fault_j_ = j;
  }
  bool has_fault() const { return fault_i_ != 0; }

  // All n function values on interval i, in O(n). Levels build on each
  // other along the interval-halving path shared by every function.
  void row(uint64_t i, std::vector<int8_t>& out) const {
    uint64_t n = size();
    out.assign(n, 1);
    if (m_ == 0) {
      apply_fault(i, out);
      return;
    }
    // reduced interval R_g per grid g (R_m = i)
    std::vector<uint64_t> reduced(m_ + 1);
    reduced[m_] = i;
    for (uint32_t g = m_; g >= 1; --g) {
      uint64_t half = uint64_t{1} << (g - 1);
      reduced[g - 1] = reduced[g] > half ? reduced[g] - half : reduced[g];
    }
    // prev holds all levels <= g-1 evaluated at (R_{g-1}, grid g-1),
    // flattened in the g_j enumeration order.
    std::vector<int8_t> prev{1};
    std::vector<int8_t> cur;
    for (uint32_t g = 1; g <= m_; ++g) {
      uint64_t half = uint64_t{1} << (g - 1);
      bool second_half = reduced[g] > half;
      cur.assign(uint64_t{1} << g, 1);
      cur[0] = 1;
      cur[1] = second_half ? -1 : 1;  // f_1
      if (g >= 2) {
        uint64_t quarter = (reduced[g] - 1) >> (g - 2);
        cur[2] = static_cast<int8_t>(detail::kWalshLevel2[0][quarter]);
        cur[3] = static_cast<int8_t>(detail::kWalshLevel2[1][quarter]);
      }
      for (uint32_t level = 3; level <= g; ++level) {
        uint64_t base = uint64_t{1} << (level - 1);
        for (uint64_t t = 1; t <= base; ++t) {
          uint64_t parent = (t + 1) / 2;
          int8_t v = prev[(base >> 1) + parent - 1];
          if (second_half) {
            bool flip = (t & 1) ? (parent % 2 == 0) : (parent % 2 == 1);
            if (flip) v = -v;
          }
          cur[base + t - 1] = v;
        }
      }
      std::swap(prev, cur);
    }
    out = std::move(prev);
    apply_fault(i, out);
  }

  std::vector<int8_t> row(uint64_t i) const {
    std::vector<int8_t> out;
    row(i, out);
    return out;
  }

  // Values of g_j on all n intervals, in O(n): the level pattern of
  // f_l^{(t)} over its own 2^l grid, each value repeated 2^{m-l} times.
  void column(uint64_t j, std::vector<int8_t>& out) const {
    uint64_t n = size();
    std::vector<int8_t> pattern{1};
    if (j >= 2) {
      uint32_t level = (j == 2) ? 1 : static_cast<uint32_t>(std::bit_width(j - 1));
      uint64_t t = (j == 2) ? 1 : j - (uint64_t{1} << (level - 1));
      pattern = column_pattern(level, t);
    }
    out.resize(n);
    uint64_t repeat = n / pattern.size();
    uint64_t pos = 0;
    for (int8_t v : pattern)
      for (uint64_t c = 0; c < repeat; ++c) out[pos++] = v;
    if (fault_j_ == j && fault_i_ >= 1 && fault_i_ <= n)
      out[fault_i_ - 1] = -out[fault_i_ - 1];
  }

  Eigen::MatrixXd dense() const {
    uint64_t n = size();
    Eigen::MatrixXd out(n, n);
    std::vector<int8_t> buf;
    for (uint64_t i = 1; i <= n; ++i) {
      row(i, buf);
      for (uint64_t j = 0; j < n; ++j)
        out(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j)) = buf[j];
    }
    return out;
  }

 private:
  void apply_fault(uint64_t i, std::vector<int8_t>& out) const {
    if (fault_i_ == i && fault_j_ >= 1 && fault_j_ <= out.size())
      out[fault_j_ - 1] = -out[fault_j_ - 1];
  }

  static std::vector<int8_t> column_pattern(uint32_t level, uint64_t t) {
    if (level == 1) return {1, -1};
    if (level == 2) {
      const int* q = detail::kWalshLevel2[t - 1];
      return {static_cast<int8_t>(q[0]), static_cast<int8_t>(q[1]),
              static_cast<int8_t>(q[2]), static_cast<int8_t>(q[3])};
    }
    uint64_t parent = (t + 1) / 2;
    std::vector<int8_t> half = column_pattern(level - 1, parent);
    int sign;
    if (t & 1)
      sign = (parent % 2 == 1) ? 1 : -1;
    else
      sign = (parent % 2 == 0) ? 1 : -1;
    std::vector<int8_t> out;
    out.reserve(half.size() * 2);
    out.insert(out.end(), half.begin(), half.end());
    for (int8_t v : half) out.push_back(static_cast<int8_t>(sign * v));
    return out;
  }

  uint32_t m_;
  uint64_t fault_i_ = 0;
  uint64_t fault_j_ = 0;
};

// ---------------------------------------------------------------------------
// Orthogonality verification
// ---------------------------------------------------------------------------

struct OrthogonalityReport {
  double max_deviation = 0.0;  // max over tested pairs of |<row_r, row_t> - n*delta|
  double threshold = 0.0;      // tol * n
  bool pass = false;
  uint64_t pairs_checked = 0;
  bool exhaustive = false;
  bool exact = false;          // integer accumulation (Walsh)
};

inline constexpr uint64_t kExhaustivePairLimit = uint64_t{1} << 12;

// DFT rows: sum_s a_{rs} conj(a_{ts}) must be n on the diagonal, 0 off it.
// Exhaustive through n = 2^12 (blocked products); sampled pairs beyond.
inline OrthogonalityReport verify_orthogonality(const DftKernel& kernel, double tol,
                                                uint64_t sample_pairs = 4096,
                                                uint64_t seed = 1) {
  const uint64_t n = kernel.size();
  OrthogonalityReport report;
  report.threshold = tol * static_cast<double>(n);
  if (n <= kExhaustivePairLimit) {
    report.exhaustive = true;
    Eigen::MatrixXcd dense = kernel.dense();
    const Eigen::Index nn = static_cast<Eigen::Index>(n);
    const Eigen::Index panel = std::min<Eigen::Index>(nn, 512);
    for (Eigen::Index rb = 0; rb < nn; rb += panel) {
      Eigen::Index rows = std::min(panel, nn - rb);
      for (Eigen::Index cb = rb; cb < nn; cb += panel) {
        Eigen::Index cols = std::min(panel, nn - cb);
        Eigen::MatrixXcd gram =
            dense.middleRows(rb, rows) * dense.middleRows(cb, cols).adjoint();
        for (Eigen::Index x = 0; x < rows; ++x)
          for (Eigen::Index y = 0; y < cols; ++y) {
            if (cb + y < rb + x) continue;
            double expected = (rb + x == cb + y) ? static_cast<double>(n) : 0.0;
            double dev = std::abs(gram(x, y) - expected);
            if (dev > report.max_deviation) report.max_deviation = dev;
            ++report.pairs_checked;
          }
      }
    }
  } else {
    Xoshiro256pp rng(seed);
    for (uint64_t trial = 0; trial < sample_pairs; ++trial) {
      uint64_t r = rng.below(n) + 1;
      uint64_t t = (trial % 8 == 0) ? r : rng.below(n) + 1;
      std::complex<double> acc = 0.0;
      for (uint64_t s = 1; s <= n; ++s)
        acc += kernel.entry(r, s) * std::conj(kernel.entry(t, s));
      double expected = (r == t) ? static_cast<double>(n) : 0.0;
      double dev = std::abs(acc - expected);
      if (dev > report.max_deviation) report.max_deviation = dev;
      ++report.pairs_checked;
    }
  }
  report.pass = report.max_deviation <= report.threshold;
  return report;
}

// Walsh columns: sum_i a_{ij} a_{ik} = n*delta_{jk}, accumulated exactly in
// integers through sign bitsets; the report must show deviation 0.
inline OrthogonalityReport verify_orthogonality(const WalshKernel& kernel, double tol,
                                                uint64_t sample_pairs = 4096,
                                                uint64_t seed = 1) {
  const uint64_t n = kernel.size();
  OrthogonalityReport report;
  report.threshold = tol * static_cast<double>(n);
  report.exact = true;
  uint64_t max_dev = 0;
  if (n <= kExhaustivePairLimit) {
    report.exhaustive = true;
    // pack column signs: bit i set when a_{i+1, j} == -1
    const uint64_t words = (n + 63) / 64;
    std::vector<uint64_t> packed(n * words, 0);
    std::vector<int8_t> buf;
    for (uint64_t i = 1; i <= n; ++i) {
      kernel.row(i, buf);
      for (uint64_t j = 0; j < n; ++j)
        if (buf[j] < 0) packed[j * words + (i - 1) / 64] |= uint64_t{1} << ((i - 1) % 64);
    }
    for (uint64_t j = 0; j < n; ++j) {
      const uint64_t* cj = &packed[j * words];
      for (uint64_t k = j; k < n; ++k) {
        const uint64_t* ck = &packed[k * words];
        uint64_t differing = 0;
        for (uint64_t w = 0; w < words; ++w)
          differing += static_cast<uint64_t>(std::popcount(cj[w] ^ ck[w]));
        int64_t inner = static_cast<int64_t>(n) - 2 * static_cast<int64_t>(differing);
        int64_t expected = (j == k) ? static_cast<int64_t>(n) : 0;
        uint64_t dev = static_cast<uint64_t>(std::abs(inner - expected));
        if (dev > max_dev) max_dev = dev;
        ++report.pairs_checked;
      }
    }
  } else {
    Xoshiro256pp rng(seed);
    std::vector<int8_t> cj, ck;
    for (uint64_t trial = 0; trial < sample_pairs; ++trial) {
      uint64_t j = rng.below(n) + 1;
      uint64_t k = (trial % 8 == 0) ? j : rng.below(n) + 1;
      kernel.column(j, cj);
      kernel.column(k, ck);
      int64_t inner = 0;
      for (uint64_t i = 0; i < n; ++i) inner += cj[i] * ck[i];
      int64_t expected = (j == k) ? static_cast<int64_t>(n) : 0;
      uint64_t dev = static_cast<uint64_t>(std::abs(inner - expected));
      if (dev > max_dev) max_dev = dev;
      ++report.pairs_checked;
    }
  }
  report.max_deviation = static_cast<double>(max_dev);
  report.pass = report.max_deviation <= report.threshold;
  return report;
}

// ---------------------------------------------------------------------------
// Dual row sums and bilinear forms (row-streamed, matrix never materialized)
// ---------------------------------------------------------------------------

// sum_r |sum_s phi_s a_{rs}|
inline double dual_row_sum(const DftKernel& kernel, const Eigen::Ref<const Eigen::VectorXcd>& phi) {
  const uint64_t n = kernel.size();
  assert(static_cast<uint64_t>(phi.size()) == n);
  double total = 0.0;
  for (uint64_t r = 1; r <= n; ++r) {
    std::complex<double> acc = 0.0;
    kernel.for_each_in_row(r, [&](uint64_t s, std::complex<double> v) {
      acc += phi[static_cast<Eigen::Index>(s - 1)] * v;
    });
    total += std::abs(acc);
  }
  return total;
}

inline double dual_row_sum(const WalshKernel& kernel, const Eigen::Ref<const Eigen::VectorXd>& phi) {
  const uint64_t n = kernel.size();
  assert(static_cast<uint64_t>(phi.size()) == n);
  double total = 0.0;
  std::vector<int8_t> buf;
  for (uint64_t i = 1; i <= n; ++i) {
    kernel.row(i, buf);
    double acc = 0.0;
    for (uint64_t j = 0; j < n; ++j)
      acc += phi[static_cast<Eigen::Index>(j)] * buf[j];
    total += std::abs(acc);
  }
  return total;
}

// Sparse-support variants: cost n * |support| instead of n^2, which is what
// makes the 2^20-dimensional block reachable at all.
inline double dual_row_sum_sparse(const DftKernel& kernel,
                                  const std::vector<std::pair<uint64_t, std::complex<double>>>& phi) {
  const uint64_t n = kernel.size();
  double total = 0.0;
  for (uint64_t r = 1; r <= n; ++r) {
    std::complex<double> acc = 0.0;
    for (const auto& [s, v] : phi) acc += v * kernel.entry(r, s);
    total += std::abs(acc);
  }
  return total;
}

inline double dual_row_sum_sparse(const WalshKernel& kernel,
                                  const std::vector<std::pair<uint64_t, double>>& phi) {
  const uint64_t n = kernel.size();
  std::vector<std::vector<int8_t>> cols(phi.size());
  for (size_t t = 0; t < phi.size(); ++t) kernel.column(phi[t].first, cols[t]);
  double total = 0.0;
  for (uint64_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (size_t t = 0; t < phi.size(); ++t) acc += phi[t].second * cols[t][i];
    total += std::abs(acc);
  }
  return total;
}

// sum_{r,s} a_{rs} y1_r y2_s  (y1 plays the l_{p*} role over rows, y2 the
// l_inf role over columns)
inline std::complex<double> bilinear_form(const DftKernel& kernel,
                                          const Eigen::Ref<const Eigen::VectorXcd>& y1,
                                          const Eigen::Ref<const Eigen::VectorXcd>& y2) {
  const uint64_t n = kernel.size();
  assert(static_cast<uint64_t>(y1.size()) == n && static_cast<uint64_t>(y2.size()) == n);
  std::complex<double> total = 0.0;
  for (uint64_t r = 1; r <= n; ++r) {
    std::complex<double> acc = 0.0;
    kernel.for_each_in_row(r, [&](uint64_t s, std::complex<double> v) {
      acc += y2[static_cast<Eigen::Index>(s - 1)] * v;
    });
    total += y1[static_cast<Eigen::Index>(r - 1)] * acc;
  }
  return total;
}

inline double bilinear_form(const WalshKernel& kernel,
                            const Eigen::Ref<const Eigen::VectorXd>& y1,
                            const Eigen::Ref<const Eigen::VectorXd>& y2) {
  const uint64_t n = kernel.size();
  assert(static_cast<uint64_t>(y1.size()) == n && static_cast<uint64_t>(y2.size()) == n);
  double total = 0.0;
  std::vector<int8_t> buf;
  for (uint64_t i = 1; i <= n; ++i) {
    kernel.row(i, buf);
    double acc = 0.0;
    for (uint64_t j = 0; j < n; ++j)
      acc += y2[static_cast<Eigen::Index>(j)] * buf[j];
    total += y1[static_cast<Eigen::Index>(i - 1)] * acc;
  }
  return total;
}

// the Schur-test ceiling n^{1/2 + 1/p} for unit vectors in the paired balls
inline double schur_bound(uint64_t n, double p) {
  return std::pow(static_cast<double>(n), 0.5 + 1.0 / p);
}

}  // namespace macphail
