#include "contdp/noise.hpp"

#include <cmath>
#include <string>

#include "contdp/errors.hpp"
#include "contdp/tree.hpp"

namespace contdp {

PrivacyBudget PrivacyBudget::ZCDP(double rho) {
  if (!(rho > 0)) throw ArgumentError("zCDP budget requires rho > 0");
  PrivacyBudget b;
  b.kind = BudgetKind::kZCDP;
  b.rho = rho;
  return b;
}

PrivacyBudget PrivacyBudget::ApproxDP(double eps, double delta) {
  if (!(eps > 0)) throw ArgumentError("approx-DP budget requires eps > 0");
  if (!(delta > 0 && delta < 1))
    throw ArgumentError("approx-DP budget requires delta in (0,1)");
  PrivacyBudget b;
  b.kind = BudgetKind::kApproxDP;
  b.eps = eps;
  b.delta = delta;
  return b;
}

PrivacyBudget PrivacyBudget::PureDP(double eps) {
  if (!(eps > 0)) throw ArgumentError("pure-DP budget requires eps > 0");
  PrivacyBudget b;
  b.kind = BudgetKind::kPureDP;
  b.eps = eps;
  return b;
}

NoiseKind NoiseKind::Gaussian(double sigma) {
  if (!(sigma > 0)) throw ArgumentError("Gaussian scale must be > 0");
  return NoiseKind{Family::kGaussian, sigma};
}

NoiseKind NoiseKind::Laplace(double lambda) {
  if (!(lambda > 0)) throw ArgumentError("Laplace scale must be > 0");
  return NoiseKind{Family::kLaplace, lambda};
}

double sample_gaussian(double sigma, Rng& rng) {
  if (!(sigma > 0)) throw ArgumentError("sample_gaussian requires sigma > 0");
  // Marsaglia polar, one value per accepted pair; the partner draw is
  // discarded so the call consumes a seed-determined number of bits.
  for (;;) {
    double u = 2.0 * rng.next_unit() - 1.0;
    double v = 2.0 * rng.next_unit() - 1.0;
    double s = u * u + v * v;
    if (s > 0.0 && s < 1.0)
      return sigma * u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

double sample_laplace(double lambda, Rng& rng) {
  if (!(lambda > 0)) throw ArgumentError("sample_laplace requires lambda > 0");
  double u = rng.next_unit() - 0.5;  // (-1/2, 1/2), never an endpoint
  double sign = u < 0 ? -1.0 : 1.0;
  return -lambda * sign * std::log(1.0 - 2.0 * std::abs(u));
}

double sample_gumbel(double beta, Rng& rng) {
  if (!(beta > 0)) throw ArgumentError("sample_gumbel requires beta > 0");
  return -beta * std::log(-std::log(rng.next_unit()));
}

double sample_noise(const NoiseKind& kind, Rng& rng) {
  switch (kind.family) {
    case NoiseKind::Family::kGaussian: return sample_gaussian(kind.scale, rng);
    case NoiseKind::Family::kLaplace: return sample_laplace(kind.scale, rng);
    case NoiseKind::Family::kNone: return 0.0;
  }
  throw ArgumentError("unknown noise family");
}

double tree_sigma(int d, std::int64_t T, double rho) {
  if (d < 1) throw ArgumentError("tree_sigma requires d >= 1");
  if (T < 1) throw ArgumentError("tree_sigma requires T >= 1");
  if (!(rho > 0)) throw ArgumentError("tree_sigma requires rho > 0");
  int levels = floor_log2(next_pow2(T)) + 1;
  return std::sqrt(static_cast<double>(d) * levels / (2.0 * rho));
}

double tree_lambda(int d, std::int64_t T, double eps) {
  if (d < 1) throw ArgumentError("tree_lambda requires d >= 1");
  if (T < 1) throw ArgumentError("tree_lambda requires T >= 1");
  if (!(eps > 0)) throw ArgumentError("tree_lambda requires eps > 0");
  int levels = floor_log2(next_pow2(T)) + 1;
  return static_cast<double>(d) * levels / eps;
}

double gauss_max_tail(std::int64_t m, double sigma, double ell) {
  if (m < 1) throw ArgumentError("gauss_max_tail requires m >= 1");
  if (!(sigma > 0)) throw ArgumentError("gauss_max_tail requires sigma > 0");
  return 2.0 * static_cast<double>(m) * std::exp(-ell * ell / (2.0 * sigma * sigma));
}

double laplace_max_tail_threshold(std::int64_t m, double lambda, double a) {
  if (m < 1) throw ArgumentError("laplace_max_tail_threshold requires m >= 1");
  if (!(lambda > 0))
    throw ArgumentError("laplace_max_tail_threshold requires lambda > 0");
  if (!(a > 1)) throw ArgumentError("laplace_max_tail_threshold requires a > 1");
  return lambda * (std::log(static_cast<double>(m)) + std::log(a));
}

}  // namespace contdp
