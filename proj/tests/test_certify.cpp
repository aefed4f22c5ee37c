#include <doctest.h>

#include <cmath>
#include <limits>

#include "macphail/certify.hpp"

using namespace macphail;

namespace {
const double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("random dual units are unit vectors in the right norm") {
  for (Field field : {Field::complex_dft, Field::real_walsh}) {
    for (double pstar : {2.0, 3.0, kInf}) {
      for (uint64_t n : {1ull, 4ull, 64ull}) {
        auto sample = random_dual_unit(n, pstar, 42, field);
        double norm;
        if (std::isinf(pstar)) {
          norm = sample.phi.dense.cwiseAbs().maxCoeff();
        } else {
          norm = 0.0;
          for (Eigen::Index i = 0; i < sample.phi.dense.size(); ++i)
            norm += std::pow(std::abs(sample.phi.dense[i]), pstar);
          norm = std::pow(norm, 1.0 / pstar);
        }
        CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
        if (field == Field::real_walsh)
          CHECK(sample.phi.dense.imag().cwiseAbs().maxCoeff() == 0.0);
      }
    }
  }
}

TEST_CASE("samplers are deterministic in the seed") {
  auto a = random_dual_unit(16, 3.0, 977, Field::complex_dft);
  auto b = random_dual_unit(16, 3.0, 977, Field::complex_dft);
  CHECK(a.phi.dense == b.phi.dense);
  auto c = random_dual_unit(16, 3.0, 978, Field::complex_dft);
  CHECK(a.phi.dense != c.phi.dense);
  auto s1 = random_dual_unit_sparse(1 << 16, 2.0, 32, 5, Field::real_walsh);
  auto s2 = random_dual_unit_sparse(1 << 16, 2.0, 32, 5, Field::real_walsh);
  REQUIRE(s1.phi.support.size() == s2.phi.support.size());
  for (size_t i = 0; i < s1.phi.support.size(); ++i) {
    CHECK(s1.phi.support[i].first == s2.phi.support[i].first);
    CHECK(s1.phi.support[i].second == s2.phi.support[i].second);
  }
}

TEST_CASE("sparse dual units respect the support size and norm") {
  auto sample = random_dual_unit_sparse(1 << 20, 1.5, 64, 7, Field::complex_dft);
  CHECK(sample.phi.sparse);
  CHECK(sample.phi.support.size() == 64);
  double norm = 0.0;
  for (const auto& [s, v] : sample.phi.support) {
    CHECK(s >= 1);
    CHECK(s <= (uint64_t{1} << 20));
    norm += std::pow(std::abs(v), 1.5);
  }
  CHECK(std::pow(norm, 1.0 / 1.5) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("block dual sum examples") {
  Config cfg = make_config(Field::complex_dft, 1.0, 2);
  {
    // k = 1: phi = e_1 gives exactly 1 = alpha^0
    DualSample sample;
    sample.phi.block_k = 1;
    sample.phi.dense = Eigen::VectorXcd::Ones(1);
    CHECK(block_dual_sum(1, sample, cfg) == doctest::Approx(1.0));
  }
  {
    // k = 2, phi = e_4 (s = 1): sum_r |a_{r1}|/16 = 4/16
    DualSample sample;
    sample.phi.block_k = 2;
    sample.phi.dense = Eigen::VectorXcd::Zero(4);
    sample.phi.dense[0] = 1.0;
    double v = block_dual_sum(2, sample, cfg);
    CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(v <= block_sup_bound(2, cfg));
  }
  {
    DualSample zero;
    zero.phi.block_k = 3;
    zero.phi.dense = Eigen::VectorXcd::Zero(64);
    CHECK(block_dual_sum(3, zero, cfg) == 0.0);
  }
}

TEST_CASE("sampled dual sums never exceed alpha^{1-k}") {
  for (Field field : {Field::complex_dft, Field::real_walsh}) {
    for (double p : {1.0, 1.5, 2.0}) {
      Config cfg = make_config(field, p, 2);
      for (uint32_t k = 1; k <= 3; ++k) {
        auto est = estimate_block_sup(k, 200, 1234, cfg);
        CHECK(est.observed <= est.bound * (1.0 + 1e-9));
        CHECK(est.bound == doctest::Approx(std::pow(2.0, 1.0 - static_cast<double>(k))));
      }
    }
  }
}

TEST_CASE("block sup at k=1 is attained by every unit sample") {
  for (double p : {1.0, 1.5, 2.0}) {
    Config cfg = make_config(Field::complex_dft, p, 2);
    auto est = estimate_block_sup(1, 32, 5, cfg);
    CHECK(est.observed == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(est.bound == 1.0);
  }
}

TEST_CASE("zero trials report zero observed") {
  Config cfg = make_config(Field::complex_dft, 1.0, 2);
  auto est = estimate_block_sup(2, 0, 5, cfg);
  CHECK(est.observed == 0.0);
  CHECK(est.bound == 0.5);
}

TEST_CASE("sparse spot check on the 2^20-dimensional block") {
  Config cfg = make_config(Field::complex_dft, 1.5, 2);
  auto est = estimate_block_sup(5, 2, 99, cfg);
  CHECK(est.observed > 0.0);
  CHECK(est.observed <= est.bound * (1.0 + 1e-9));
  CHECK(est.bound == doctest::Approx(1.0 / 16));
}

TEST_CASE("tail certificates") {
  Config cfg2 = make_config(Field::complex_dft, 1.0, 2);
  Config cfg3 = make_config(Field::complex_dft, 1.0, 3);
  CHECK(tail_bound(2, cfg2).bound == 1.0);
  CHECK(tail_bound(1, cfg2).bound == 2.0);
  CHECK(tail_bound(2, cfg3).bound == 0.5);
  // geometric decay: tail(n+1) = tail(n)/alpha, exact at alpha = 2
  for (uint32_t n = 1; n <= 40; ++n)
    CHECK(tail_bound(n + 1, cfg2).bound * 2.0 == tail_bound(n, cfg2).bound);
  for (uint32_t n = 1; n <= 30; ++n)
    CHECK(tail_bound(n + 1, cfg3).bound ==
          doctest::Approx(tail_bound(n, cfg3).bound / 3.0).epsilon(1e-15));
  // log form matches the linear form while the latter is representable
  for (uint32_t n : {1u, 5u, 20u}) {
    auto cert = tail_bound(n, cfg3);
    CHECK(pow_alpha(3, cert.bound_log_alpha) == doctest::Approx(cert.bound).epsilon(1e-12));
  }
}

TEST_CASE("delta thresholds") {
  Config cfg = make_config(Field::complex_dft, 1.0, 2);
  CHECK(delta_threshold(0.3, cfg) == 4);   // tail(4) = 0.25
  CHECK(delta_threshold(2.5, cfg) == 1);   // tail(1) = 2
  CHECK(delta_threshold(1e-3, cfg) == 12); // tail(12) = 2^-10 = 9.77e-4
  CHECK_THROWS_AS(delta_threshold(0.0, cfg), std::invalid_argument);
  // threshold is the smallest qualifying block
  for (double delta : {0.3, 0.001, 1e-6}) {
    uint32_t n = delta_threshold(delta, cfg);
    CHECK(tail_bound(n, cfg).bound < delta);
    if (n > 1) CHECK(tail_bound(n - 1, cfg).bound >= delta);
  }
}

TEST_CASE("finite subset norms: pinned examples") {
  for (Field field : {Field::complex_dft, Field::real_walsh}) {
    Config cfg = make_config(field, 1.0, 2);
    CHECK(finite_subset_norm(std::vector<uint64_t>{1}, cfg) == doctest::Approx(1.0));
    CHECK(finite_subset_norm(std::vector<uint64_t>{2, 3}, cfg) == 0.0);
    // the whole of block 2: kernel column sums cancel except one column
    CHECK(finite_subset_norm(std::vector<uint64_t>{4, 5, 6, 7}, cfg) ==
          doctest::Approx(0.25).epsilon(1e-12));
  }
}

TEST_CASE("finite subset norms sit under the tail certificate") {
  for (Field field : {Field::complex_dft, Field::real_walsh}) {
    for (double p : {1.0, 1.5, 2.0}) {
      Config cfg = make_config(field, p, 2);
      Xoshiro256pp rng(31);
      for (int trial = 0; trial < 20; ++trial) {
        std::vector<uint64_t> M;
        uint32_t k_min = 2 + static_cast<uint32_t>(rng.below(2));  // blocks {2,3} or {3}
        for (uint32_t k = k_min; k <= 3; ++k) {
          uint64_t jk = block_start(k, 2).to_uint64();
          uint64_t count = rng.below(jk) + 1;
          for (uint64_t c = 0; c < count; ++c) M.push_back(jk + rng.below(jk));
        }
        double norm = finite_subset_norm(M, cfg);
        CHECK(norm <= tail_bound(k_min, cfg).bound * (1.0 + 1e-9));
      }
    }
  }
}

TEST_CASE("p-th powers add across blocks") {
  for (double p : {1.0, 1.5, 2.0}) {
    Config cfg = make_config(Field::complex_dft, p, 2);
    std::vector<uint64_t> m1{4, 6};
    std::vector<uint64_t> m2{64, 70, 100};
    std::vector<uint64_t> both{4, 6, 64, 70, 100};
    double a = finite_subset_norm(m1, cfg);
    double b = finite_subset_norm(m2, cfg);
    double c = finite_subset_norm(both, cfg);
    CHECK(std::pow(c, p) ==
          doctest::Approx(std::pow(a, p) + std::pow(b, p)).epsilon(1e-12));
  }
}

TEST_CASE("duplicate indices collapse") {
  Config cfg = make_config(Field::complex_dft, 1.0, 2);
  CHECK(finite_subset_norm(std::vector<uint64_t>{4, 4, 4}, cfg) ==
        doctest::Approx(finite_subset_norm(std::vector<uint64_t>{4}, cfg)));
}

TEST_CASE("budget gate on deep blocks") {
  Config cfg = make_config(Field::complex_dft, 1.0, 2);
  BigUInt j6 = block_start(6, 2);
  CHECK_THROWS_AS(finite_subset_norm(std::vector<BigUInt>{j6}, cfg), BudgetError);
  CHECK_THROWS_AS(estimate_block_sup(6, 1, 1, cfg), BudgetError);
}
