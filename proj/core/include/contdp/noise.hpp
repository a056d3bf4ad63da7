#pragma once

#include <cstdint>

#include "contdp/rng.hpp"

namespace contdp {

enum class BudgetKind { kZCDP, kApproxDP, kPureDP };

// Privacy budget in one of three currencies. Only the fields of the active
// kind are meaningful.
struct PrivacyBudget {
  BudgetKind kind = BudgetKind::kZCDP;
  double rho = 0;    // kZCDP
  double eps = 0;    // kApproxDP, kPureDP
  double delta = 0;  // kApproxDP

  static PrivacyBudget ZCDP(double rho);
  static PrivacyBudget ApproxDP(double eps, double delta);
  static PrivacyBudget PureDP(double eps);
};

// Additive noise family and scale. kNone is the noiseless debug mode.
struct NoiseKind {
  enum class Family { kGaussian, kLaplace, kNone };

  Family family = Family::kNone;
  double scale = 0;  // sigma for Gaussian, lambda for Laplace

  static NoiseKind Gaussian(double sigma);
  static NoiseKind Laplace(double lambda);
  static NoiseKind None() { return NoiseKind{}; }
};

// Mean-0 Gaussian with standard deviation sigma, Marsaglia polar method.
double sample_gaussian(double sigma, Rng& rng);

// Mean-0 Laplace with scale lambda (variance 2 lambda^2), inverse CDF.
double sample_laplace(double lambda, Rng& rng);

// Standard Gumbel scaled by beta; argmax of (q_j + beta*G_j) selects j with
// probability proportional to exp(q_j/beta).
double sample_gumbel(double beta, Rng& rng);

// One draw from `kind` (0 for kNone).
double sample_noise(const NoiseKind& kind, Rng& rng);

// Per-node Gaussian scale of the tree mechanism under rho-zCDP:
// sqrt(d*(log2(Tp)+1)/(2*rho)) where Tp pads T to the next power of two.
double tree_sigma(int d, std::int64_t T, double rho);

// Per-node Laplace scale of the pure-DP tree: d*(log2(Tp)+1)/eps.
double tree_lambda(int d, std::int64_t T, double eps);

// Union bound on P(max of m |N(0,sigma^2)| draws > ell): 2m*exp(-ell^2/(2sigma^2)).
// Test oracle; may exceed 1.
double gauss_max_tail(std::int64_t m, double sigma, double ell);

// Threshold ell with P(max of m |Laplace(lambda)| draws > ell) <= 1/a:
// lambda*(ln m + ln a). Natural logs.
double laplace_max_tail_threshold(std::int64_t m, double lambda, double a);

}  // namespace contdp
