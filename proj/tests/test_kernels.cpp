#include <doctest.h>

#include <Eigen/Core>
#include <cmath>
#include <complex>

#include "macphail/certify.hpp"
#include "macphail/kernels.hpp"
#include "macphail/rng.hpp"

using namespace macphail;
using std::complex;

namespace {

// Walsh functions on dyadic grids, tabulated by hand from the displayed
// piecewise definitions (levels 0-2) and the recursion (level 3). These are
// a fixture independent of the evaluation code.
const int kWalshM1[2][2] = {{1, 1}, {1, -1}};            // columns g1,g2 on halves
const int kWalshM2[4][4] = {{1, 1, 1, 1},
                            {1, 1, -1, -1},
                            {1, -1, -1, 1},
                            {1, -1, 1, -1}};             // row i = interval i
const int kWalshM3Funcs[8][8] = {
    {1, 1, 1, 1, 1, 1, 1, 1},        // g1 = f_0
    {1, 1, 1, 1, -1, -1, -1, -1},    // g2 = f_1
    {1, 1, -1, -1, -1, -1, 1, 1},    // g3 = f_2^(1)
    {1, 1, -1, -1, 1, 1, -1, -1},    // g4 = f_2^(2)
    {1, -1, -1, 1, 1, -1, -1, 1},    // g5 = f_3^(1)
    {1, -1, -1, 1, -1, 1, 1, -1},    // g6 = f_3^(2)
    {1, -1, 1, -1, -1, 1, -1, 1},    // g7 = f_3^(3)
    {1, -1, 1, -1, 1, -1, 1, -1}};   // g8 = f_3^(4)

}  // namespace

TEST_CASE("dft entries at small sizes") {
  CHECK(dft_entry(1, 1, 1) == complex<double>(1.0, 0.0));
  CHECK(std::abs(dft_entry(2, 1, 1) - complex<double>(-1.0, 0.0)) < 1e-15);
  CHECK(std::abs(dft_entry(4, 1, 1) - complex<double>(0.0, 1.0)) < 1e-15);
  CHECK(std::abs(dft_entry(4, 2, 1) - complex<double>(-1.0, 0.0)) < 1e-15);
  CHECK(std::abs(dft_entry(4, 4, 3) - complex<double>(1.0, 0.0)) < 1e-15);
}

TEST_CASE("dft kernel matches the standalone entry function") {
  for (uint64_t n : {1ull, 2ull, 5ull, 16ull, 97ull}) {
    DftKernel kernel(n);
    for (uint64_t r = 1; r <= n; ++r)
      for (uint64_t s = 1; s <= n; ++s)
        CHECK(kernel.entry(r, s) == dft_entry(n, r, s));
  }
}

TEST_CASE("dft row streaming visits the same values as entry access") {
  DftKernel kernel(64);
  for (uint64_t r : {1ull, 2ull, 17ull, 64ull}) {
    kernel.for_each_in_row(r, [&](uint64_t s, complex<double> v) {
      CHECK(v == kernel.entry(r, s));
    });
  }
}

TEST_CASE("dft unimodularity") {
  Xoshiro256pp rng(11);
  for (uint64_t n : {uint64_t{4}, uint64_t{64}, uint64_t{4096}, uint64_t{1} << 20}) {
    DftKernel kernel(n);
    for (int trial = 0; trial < 256; ++trial) {
      uint64_t r = rng.below(n) + 1;
      uint64_t s = rng.below(n) + 1;
      CHECK(std::abs(std::abs(kernel.entry(r, s)) - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("walsh matrices for m <= 2 match the displayed definitions") {
  CHECK(walsh_entry(0, 1, 1) == 1);
  for (uint64_t i = 1; i <= 2; ++i)
    for (uint64_t j = 1; j <= 2; ++j)
      CHECK(walsh_entry(1, i, j) == kWalshM1[i - 1][j - 1]);
  for (uint64_t i = 1; i <= 4; ++i)
    for (uint64_t j = 1; j <= 4; ++j)
      CHECK(walsh_entry(2, i, j) == kWalshM2[i - 1][j - 1]);
}

TEST_CASE("walsh level 3 follows the recursion branches") {
  for (uint64_t j = 1; j <= 8; ++j)
    for (uint64_t i = 1; i <= 8; ++i)
      CHECK(walsh_entry(3, i, j) == kWalshM3Funcs[j - 1][i - 1]);
}

TEST_CASE("walsh functions are constant on their defining level's grid") {
  // g_j at level l is constant on each interval of the 2^l grid, so
  // refining the evaluation grid must not change values
  for (uint32_t m = 3; m <= 6; ++m) {
    uint64_t n = uint64_t{1} << m;
    for (uint64_t j = 1; j <= 8; ++j) {
      uint64_t repeat = n / 8;
      for (uint64_t i = 1; i <= n; ++i) {
        uint64_t coarse = (i - 1) / repeat + 1;
        CHECK(walsh_entry(m, i, j) == kWalshM3Funcs[j - 1][coarse - 1]);
      }
    }
  }
}

TEST_CASE("walsh row and column generators agree with entrywise evaluation") {
  for (uint32_t m : {0u, 1u, 2u, 3u, 5u, 8u}) {
    WalshKernel kernel(m);
    uint64_t n = kernel.size();
    std::vector<int8_t> buf;
    for (uint64_t i = 1; i <= n; ++i) {
      kernel.row(i, buf);
      for (uint64_t j = 1; j <= n; ++j) CHECK(buf[j - 1] == kernel.entry(i, j));
    }
    for (uint64_t j = 1; j <= n; ++j) {
      kernel.column(j, buf);
      for (uint64_t i = 1; i <= n; ++i) CHECK(buf[i - 1] == kernel.entry(i, j));
    }
  }
}

TEST_CASE("walsh entries are exactly +-1") {
  Xoshiro256pp rng(13);
  for (uint32_t m : {4u, 10u, 16u}) {
    uint64_t n = uint64_t{1} << m;
    for (int trial = 0; trial < 512; ++trial) {
      int v = walsh_entry(m, rng.below(n) + 1, rng.below(n) + 1);
      CHECK((v == 1 || v == -1));
    }
  }
}

TEST_CASE("inner products behind the orthogonality identity") {
  DftKernel dft(4);
  std::complex<double> diag = 0.0, off = 0.0;
  for (uint64_t s = 1; s <= 4; ++s) {
    diag += dft.entry(1, s) * std::conj(dft.entry(1, s));
    off += dft.entry(1, s) * std::conj(dft.entry(2, s));
  }
  CHECK(std::abs(diag - std::complex<double>(4.0)) <= 1e-14);
  CHECK(std::abs(off) <= 1e-14);

  WalshKernel walsh(2);
  int64_t cols23 = 0;
  for (uint64_t i = 1; i <= 4; ++i) cols23 += walsh.entry(i, 2) * walsh.entry(i, 3);
  CHECK(cols23 == 0);  // integer arithmetic, exactly zero
}

TEST_CASE("dft orthogonality, exhaustive small sizes") {
  for (uint64_t n : {1ull, 2ull, 4ull, 8ull, 64ull, 256ull}) {
    auto report = verify_orthogonality(DftKernel(n), 1e-9);
    CHECK(report.exhaustive);
    CHECK(report.pass);
    CHECK(report.max_deviation <= 1e-9 * static_cast<double>(n));
    CHECK(report.pairs_checked == n * (n + 1) / 2);
  }
}

TEST_CASE("dft orthogonality, sampled above the exhaustive limit") {
  auto report = verify_orthogonality(DftKernel(uint64_t{1} << 14), 1e-9, 128, 3);
  CHECK_FALSE(report.exhaustive);
  CHECK(report.pairs_checked == 128);
  CHECK(report.pass);
}

TEST_CASE("walsh orthogonality is exactly zero") {
  for (uint32_t m = 0; m <= 8; ++m) {
    auto report = verify_orthogonality(WalshKernel(m), 1e-9);
    CHECK(report.exact);
    CHECK(report.exhaustive);
    CHECK(report.max_deviation == 0.0);
    CHECK(report.pass);
  }
}

TEST_CASE("a single flipped walsh sign is detected") {
  WalshKernel kernel(4);
  kernel.inject_fault(3, 7);
  CHECK(kernel.entry(3, 7) == -walsh_entry(4, 3, 7));
  auto report = verify_orthogonality(kernel, 1e-9);
  CHECK(report.max_deviation > 0.0);
  CHECK_FALSE(report.pass);
}

TEST_CASE("dual row sum examples") {
  {
    DftKernel kernel(1);
    Eigen::VectorXcd phi(1);
    phi << 1.0;
    CHECK(dual_row_sum(kernel, phi) == doctest::Approx(1.0));
  }
  {
    DftKernel kernel(4);
    Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(4);
    phi[0] = 1.0;  // e_1: picks column s = 1, all entries unimodular
    double v = dual_row_sum(kernel, phi);
    CHECK(v == doctest::Approx(4.0));
    CHECK(v <= schur_bound(4, 1.0));  // 4 <= 8
  }
  {
    WalshKernel kernel(2);
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(4);
    phi[0] = 1.0;
    CHECK(dual_row_sum(kernel, phi) == doctest::Approx(4.0));
  }
}

TEST_CASE("sparse dual row sums agree with dense") {
  Xoshiro256pp rng(17);
  {
    DftKernel kernel(64);
    Eigen::VectorXcd dense = Eigen::VectorXcd::Zero(64);
    std::vector<std::pair<uint64_t, complex<double>>> sparse;
    for (int t = 0; t < 8; ++t) {
      uint64_t s = rng.below(64) + 1;
      complex<double> v = rng.normal_complex();
      dense[static_cast<Eigen::Index>(s - 1)] += v;
      sparse.emplace_back(s, v);
    }
    // merge duplicates the dense way for comparison
    double a = dual_row_sum(kernel, dense);
    double b = dual_row_sum_sparse(kernel, sparse);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }
  {
    WalshKernel kernel(6);
    Eigen::VectorXd dense = Eigen::VectorXd::Zero(64);
    std::vector<std::pair<uint64_t, double>> sparse;
    for (int t = 0; t < 8; ++t) {
      uint64_t s = rng.below(64) + 1;
      double v = rng.normal();
      dense[static_cast<Eigen::Index>(s - 1)] += v;
      sparse.emplace_back(s, v);
    }
    CHECK(dual_row_sum(kernel, dense) ==
          doctest::Approx(dual_row_sum_sparse(kernel, sparse)).epsilon(1e-12));
  }
}

TEST_CASE("bilinear form examples") {
  {
    DftKernel kernel(1);
    Eigen::VectorXcd one(1);
    one << 1.0;
    CHECK(std::abs(bilinear_form(kernel, one, one) - complex<double>(1.0)) < 1e-15);
  }
  {
    // full-period cancellation: row 1 of the 4x4 DFT sums to zero
    DftKernel kernel(4);
    Eigen::VectorXcd y1 = Eigen::VectorXcd::Zero(4);
    y1[0] = 1.0;
    Eigen::VectorXcd y2 = Eigen::VectorXcd::Ones(4);
    CHECK(std::abs(bilinear_form(kernel, y1, y2)) < 1e-14);
  }
}

TEST_CASE("schur bound holds for sampled unit pairs") {
  for (double p : {1.0, 1.5, 2.0}) {
    double pstar = conjugate_exponent(p);
    for (uint64_t n : {4ull, 64ull}) {
      DftKernel dft(n);
      WalshKernel walsh(n == 4 ? 2 : 6);
      for (uint64_t trial = 0; trial < 300; ++trial) {
        auto y1 = random_dual_unit(n, pstar, derive_seed(100, trial), Field::complex_dft);
        auto y2 = random_dual_unit(n, std::numeric_limits<double>::infinity(),
                                   derive_seed(200, trial), Field::complex_dft);
        double bound = schur_bound(n, p) * (1.0 + 1e-9);
        CHECK(std::abs(bilinear_form(dft, y1.phi.dense, y2.phi.dense)) <= bound);
        auto w1 = random_dual_unit(n, pstar, derive_seed(300, trial), Field::real_walsh);
        auto w2 = random_dual_unit(n, std::numeric_limits<double>::infinity(),
                                   derive_seed(400, trial), Field::real_walsh);
        CHECK(std::abs(bilinear_form(walsh, w1.phi.dense.real(), w2.phi.dense.real())) <=
              bound);
      }
    }
  }
}

TEST_CASE("dual row sum equals the sign-pattern supremum of the bilinear form") {
  // Walsh with real phi: the +-1 brute force attains sum_r |h_r| exactly;
  // for the DFT it is only a lower bound.
  Xoshiro256pp rng(23);
  for (uint32_t m : {0u, 1u, 2u, 3u}) {
    uint64_t n = uint64_t{1} << m;
    WalshKernel kernel(m);
    Eigen::VectorXd phi(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < phi.size(); ++i) phi[i] = rng.normal();
    double row_sum = dual_row_sum(kernel, phi);
    double best = 0.0;
    for (uint64_t mask = 0; mask < (uint64_t{1} << n); ++mask) {
      Eigen::VectorXd psi = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
      for (uint64_t b = 0; b < n; ++b)
        if ((mask >> b) & 1) psi[static_cast<Eigen::Index>(b)] = -1.0;
      best = std::max(best, std::abs(bilinear_form(kernel, psi, phi)));
    }
    CHECK(best == doctest::Approx(row_sum).epsilon(1e-12));
  }
  for (uint64_t n : {2ull, 4ull, 8ull}) {
    DftKernel kernel(n);
    Eigen::VectorXcd phi(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < phi.size(); ++i) phi[i] = rng.normal_complex();
    double row_sum = dual_row_sum(kernel, phi);
    double best = 0.0;
    for (uint64_t mask = 0; mask < (uint64_t{1} << n); ++mask) {
      Eigen::VectorXcd psi = Eigen::VectorXcd::Ones(static_cast<Eigen::Index>(n));
      for (uint64_t b = 0; b < n; ++b)
        if ((mask >> b) & 1) psi[static_cast<Eigen::Index>(b)] = -1.0;
      best = std::max(best, std::abs(bilinear_form(kernel, psi, phi)));
    }
    CHECK(best <= row_sum * (1.0 + 1e-12));
  }
}
