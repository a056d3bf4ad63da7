#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "contdp/accountant.hpp"
#include "contdp/errors.hpp"
#include "contdp/noise.hpp"
#include "contdp/rng.hpp"

using namespace contdp;

TEST_CASE("rng replay is bit-exact") {
  Rng a(12345), b(12345);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(12345), d(54321);
  int differing = 0;
  for (int i = 0; i < 64; ++i)
    if (c.next_u64() != d.next_u64()) ++differing;
  CHECK(differing > 32);
}

TEST_CASE("next_unit stays inside the open interval") {
  Rng rng(99);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.next_unit();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("derive_seed separates key paths") {
  CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
  CHECK(derive_seed(1, {2}) != derive_seed(1, {2, 0}));
  CHECK(derive_seed(1, {kKeyTreeNode, 4, 4}) !=
        derive_seed(1, {kKeyStage, 4, 4}));
  CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
}

TEST_CASE("quantize_noise snaps to the dyadic grid") {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double z = sample_gaussian(5.0, rng);
    const double q = quantize_noise(z);
    CHECK(std::abs(q - z) <= 0x1p-27);
    CHECK(q * 0x1p26 == std::nearbyint(q * 0x1p26));  // on the grid
    CHECK(quantize_noise(q) == q);                    // idempotent
  }
}

TEST_CASE("samplers replay deterministically") {
  Rng a(42), b(42);
  for (int i = 0; i < 200; ++i) {
    CHECK(sample_gaussian(2.0, a) == sample_gaussian(2.0, b));
    CHECK(sample_laplace(1.5, a) == sample_laplace(1.5, b));
    CHECK(sample_gumbel(3.0, a) == sample_gumbel(3.0, b));
  }
}

TEST_CASE("gaussian sample moments match sigma") {
  Rng rng(2024);
  const int n = 1000000;
  double sum = 0, sumsq = 0;
  for (int i = 0; i < n; ++i) {
    const double z = sample_gaussian(2.0, rng);
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(var - 4.0) < 0.04);

  Rng rng1(77);
  double sum1 = 0;
  for (int i = 0; i < n; ++i) sum1 += sample_gaussian(1.0, rng1);
  CHECK(std::abs(sum1 / n) < 0.005);
}

TEST_CASE("laplace sample variance and tail match lambda") {
  Rng rng(31);
  const int n = 1000000;
  double sumsq = 0;
  int beyond2 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = sample_laplace(1.0, rng);
    sumsq += z * z;
    if (std::abs(z) > 2.0) ++beyond2;
  }
  CHECK(std::abs(sumsq / n - 2.0) < 0.02);  // variance 2 lambda^2
  // P(|X| > 2) = exp(-2) for lambda = 1
  CHECK(std::abs(static_cast<double>(beyond2) / n - std::exp(-2.0)) < 0.004);
}

TEST_CASE("gumbel sample moments match the standard distribution") {
  Rng rng(55);
  const int n = 1000000;
  double sum = 0, sumsq = 0;
  for (int i = 0; i < n; ++i) {
    const double z = sample_gumbel(1.0, rng);
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  const double euler = 0.57721566490153286;
  const double pi = 3.14159265358979324;
  CHECK(std::abs(mean - euler) < 0.005);
  CHECK(std::abs(var - pi * pi / 6.0) < 0.02);
}

TEST_CASE("factories and samplers reject non-positive scales") {
  CHECK_THROWS_AS(NoiseKind::Gaussian(0.0), ArgumentError);
  CHECK_THROWS_AS(NoiseKind::Gaussian(-1.0), ArgumentError);
  CHECK_THROWS_AS(NoiseKind::Laplace(0.0), ArgumentError);
  Rng rng(1);
  CHECK_THROWS_AS(sample_gaussian(0.0, rng), ArgumentError);
  CHECK_THROWS_AS(sample_laplace(-2.0, rng), ArgumentError);
  CHECK_THROWS_AS(sample_gumbel(0.0, rng), ArgumentError);
}

TEST_CASE("budget factories validate their parameters") {
  CHECK(PrivacyBudget::ZCDP(0.5).kind == BudgetKind::kZCDP);
  CHECK(PrivacyBudget::ZCDP(0.5).rho == 0.5);
  CHECK(PrivacyBudget::PureDP(2.0).eps == 2.0);
  CHECK(PrivacyBudget::ApproxDP(1.0, 1e-6).delta == 1e-6);
  CHECK_THROWS_AS(PrivacyBudget::ZCDP(0.0), ArgumentError);
  CHECK_THROWS_AS(PrivacyBudget::PureDP(-1.0), ArgumentError);
  CHECK_THROWS_AS(PrivacyBudget::ApproxDP(1.0, 0.0), ArgumentError);
  CHECK_THROWS_AS(PrivacyBudget::ApproxDP(1.0, 1.0), ArgumentError);
}

TEST_CASE("sample_noise dispatches by family and kNone draws nothing") {
  Rng a(9), b(9);
  const NoiseKind none = NoiseKind::None();
  CHECK(sample_noise(none, a) == 0.0);
  CHECK(a.next_u64() == b.next_u64());  // no bits consumed
  Rng c(9), d(9);
  CHECK(sample_noise(NoiseKind::Gaussian(2.0), c) == sample_gaussian(2.0, d));
  CHECK(sample_noise(NoiseKind::Laplace(3.0), c) == sample_laplace(3.0, d));
}

TEST_CASE("tree noise scales on frozen examples") {
  CHECK(tree_sigma(4, 8, 0.5) == 4.0);
  CHECK(tree_sigma(1, 1, 0.5) == 1.0);
  CHECK(tree_sigma(1, 2, 2.0) == std::sqrt(0.5));
  CHECK(tree_sigma(2, 6, 1.0) == tree_sigma(2, 8, 1.0));  // padding to 8
  CHECK(tree_lambda(2, 8, 1.0) == 8.0);
  CHECK(tree_lambda(1, 1, 1.0) == 1.0);
  CHECK(tree_lambda(3, 4, 1.0) == 9.0);
  CHECK_THROWS_AS(tree_sigma(0, 8, 1.0), ArgumentError);
  CHECK_THROWS_AS(tree_sigma(1, 0, 1.0), ArgumentError);
  CHECK_THROWS_AS(tree_sigma(1, 8, 0.0), ArgumentError);
  CHECK_THROWS_AS(tree_lambda(1, 8, 0.0), ArgumentError);
}

TEST_CASE("zCDP composition is additive") {
  CHECK(compose_zcdp(0.1, 0.2) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(compose_zcdp(0.0, 0.7) == 0.7);
  CHECK_THROWS_AS(compose_zcdp(-0.1, 0.2), ArgumentError);
  double total = 0;
  for (int i = 0; i < 10000; ++i) total = compose_zcdp(total, 0.37 / 10000.0);
  CHECK(std::abs(total - 0.37) <= 1e-12);
}

TEST_CASE("zcdp_to_dp conversion") {
  CHECK(zcdp_to_dp(0.25, std::exp(-1.0)) == 1.25);  // exact
  CHECK(zcdp_to_dp(1.0, 1e-6) == doctest::Approx(8.4338443776996765).epsilon(1e-13));
  CHECK(zcdp_to_dp(0.2, 1e-6) < zcdp_to_dp(0.3, 1e-6));    // monotone in rho
  CHECK(zcdp_to_dp(0.2, 1e-9) > zcdp_to_dp(0.2, 1e-6));    // tighter delta costs eps
  CHECK_THROWS_AS(zcdp_to_dp(0.0, 0.5), ArgumentError);
  CHECK_THROWS_AS(zcdp_to_dp(1.0, 0.0), ArgumentError);
  CHECK_THROWS_AS(zcdp_to_dp(1.0, 1.0), ArgumentError);
}

TEST_CASE("rho_from_approx_dp substitution") {
  CHECK(rho_from_approx_dp(1.0, std::exp(-1.0)) == 0.0625);  // 1/16, exact
  CHECK(rho_from_approx_dp(2.0, 1e-6) ==
        doctest::Approx(4.0 / (16.0 * std::log(1e6))).epsilon(1e-13));
  // The substituted rho never spends more than the original eps at the same
  // delta (holds whenever eps <= 8 ln(1/delta)).
  for (double eps : {0.1, 0.5, 1.0, 4.0}) {
    const double rho = rho_from_approx_dp(eps, 1e-6);
    CHECK(zcdp_to_dp(rho, 1e-6) <= eps);
  }
  CHECK_THROWS_AS(rho_from_approx_dp(0.0, 0.5), ArgumentError);
  CHECK_THROWS_AS(rho_from_approx_dp(1.0, 1.0), ArgumentError);
}

TEST_CASE("gauss_max_tail formula values") {
  CHECK(gauss_max_tail(1, 1.0, 0.0) == 2.0);
  CHECK(gauss_max_tail(10, 1.0, 3.0) == 20.0 * std::exp(-4.5));
  CHECK(gauss_max_tail(8, 2.0, 3.0) == 2.0 * gauss_max_tail(4, 2.0, 3.0));
  CHECK_THROWS_AS(gauss_max_tail(0, 1.0, 1.0), ArgumentError);
  CHECK_THROWS_AS(gauss_max_tail(1, 0.0, 1.0), ArgumentError);
}

TEST_CASE("gauss_max_tail bounds the empirical max tail") {
  Rng rng(808);
  const int trials = 20000;
  for (std::int64_t m : {1, 4, 16}) {
    for (double sigma : {1.0, 4.0}) {
      for (double mult : {1.0, 2.0, 4.0}) {
        const double ell = mult * sigma;
        int exceed = 0;
        for (int i = 0; i < trials; ++i) {
          double worst = 0;
          for (std::int64_t j = 0; j < m; ++j)
            worst = std::max(worst, std::abs(sample_gaussian(sigma, rng)));
          if (worst > ell) ++exceed;
        }
        const double empirical = static_cast<double>(exceed) / trials;
        const double slack = 3.0 * std::sqrt(0.25 / trials);
        CHECK(empirical <=
              std::min(1.0, gauss_max_tail(m, sigma, ell)) + slack);
      }
    }
  }
}

TEST_CASE("laplace_max_tail_threshold formula values") {
  CHECK(laplace_max_tail_threshold(1, 1.0, std::exp(1.0)) == 1.0);
  CHECK(laplace_max_tail_threshold(5, 3.0, 2.0) ==
        3.0 * (std::log(5.0) + std::log(2.0)));
  CHECK(laplace_max_tail_threshold(5, 4.0, 2.0) ==
        2.0 * laplace_max_tail_threshold(5, 2.0, 2.0));  // linear in lambda
  CHECK_THROWS_AS(laplace_max_tail_threshold(0, 1.0, 2.0), ArgumentError);
  CHECK_THROWS_AS(laplace_max_tail_threshold(1, 0.0, 2.0), ArgumentError);
  CHECK_THROWS_AS(laplace_max_tail_threshold(1, 1.0, 1.0), ArgumentError);
}

TEST_CASE("laplace threshold holds its failure probability") {
  Rng rng(909);
  const int trials = 20000;
  for (std::int64_t m : {1, 4, 16}) {
    for (double lambda : {1.0, 3.0}) {
      for (double a : {2.0, 8.0}) {
        const double thr = laplace_max_tail_threshold(m, lambda, a);
        int exceed = 0;
        for (int i = 0; i < trials; ++i) {
          double worst = 0;
          for (std::int64_t j = 0; j < m; ++j)
            worst = std::max(worst, std::abs(sample_laplace(lambda, rng)));
          if (worst > thr) ++exceed;
        }
        const double empirical = static_cast<double>(exceed) / trials;
        const double p = 1.0 / a;
        const double slack = 3.0 * std::sqrt(p * (1.0 - p) / trials);
        CHECK(empirical <= p + slack);
      }
    }
  }
}
