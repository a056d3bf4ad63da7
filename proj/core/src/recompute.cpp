#include "contdp/recompute.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "contdp/errors.hpp"
#include "contdp/tree.hpp"

namespace contdp {

RecomputeTarget RecomputeTarget::Sensitivity1Fn(
    std::function<double(const ColumnSums&, std::int64_t)> fn) {
  if (!fn) throw ArgumentError("Sensitivity1Fn requires a callable");
  return {Kind::kSensitivity1Fn, std::move(fn)};
}

bool is_recompute_step(std::int64_t t, std::int64_t r, std::int64_t m) {
  return t >= 1 && (t - 1) % r == 0 && (t - 1) / r < m;
}

RecomputeState recompute_init(std::int64_t T, std::int64_t r, int d,
                              const PrivacyBudget& budget,
                              const RecomputeTarget& target, std::uint64_t seed,
                              std::optional<NoiseKind> noise_override) {
  if (T < 2) throw ArgumentError("recompute mechanism requires T >= 2");
  if (r < 1 || r > T - 1)
    throw ArgumentError("recompute period must satisfy 1 <= r <= T-1, got r=" +
                        std::to_string(r));
  if (d < 1) throw ArgumentError("recompute mechanism requires d >= 1");
  if (target.kind == RecomputeTarget::Kind::kSensitivity1Fn && !target.fn)
    throw ArgumentError("Sensitivity1Fn target has no callable");

  RecomputeState state;
  state.T = T;
  state.r = r;
  state.m = (T - 1) / r;
  state.d = d;
  state.target = target;
  state.seed = seed;

  const double m_d = static_cast<double>(state.m);
  if (target.kind == RecomputeTarget::Kind::kSelect) {
    if (noise_override.has_value()) {
      if (noise_override->family != NoiseKind::Family::kNone)
        throw ArgumentError(
            "selection recomputes via the exponential mechanism; only the "
            "noiseless override applies");
      state.select_noiseless = true;
    } else {
      switch (budget.kind) {
        case BudgetKind::kZCDP:
          state.eps_prime = std::sqrt(2.0 * budget.rho / m_d);
          break;
        case BudgetKind::kPureDP:
          state.eps_prime = budget.eps / m_d;
          break;
        case BudgetKind::kApproxDP:
          throw BudgetKindError(
              "recompute mechanism accepts zCDP or pure-DP budgets; convert "
              "(eps,delta) via rho_from_approx_dp first");
      }
    }
  } else {
    if (noise_override.has_value()) {
      state.noise = *noise_override;
    } else {
      switch (budget.kind) {
        case BudgetKind::kZCDP:
          state.noise = NoiseKind::Gaussian(std::sqrt(m_d / (2.0 * budget.rho)));
          break;
        case BudgetKind::kPureDP:
          state.noise = NoiseKind::Laplace(m_d / budget.eps);
          break;
        case BudgetKind::kApproxDP:
          throw BudgetKindError(
              "recompute mechanism accepts zCDP or pure-DP budgets; convert "
              "(eps,delta) via rho_from_approx_dp first");
      }
    }
  }
  state.live_sums.assign(d, 0);
  return state;
}

double stage_noise(std::uint64_t seed, const NoiseKind& noise, std::int64_t k) {
  if (noise.family == NoiseKind::Family::kNone) return 0.0;
  Rng rng = stage_rng(seed, k);
  return quantize_noise(sample_noise(noise, rng));
}

Rng stage_rng(std::uint64_t seed, std::int64_t k) {
  return Rng(derive_seed(seed, {kKeyStage, static_cast<std::uint64_t>(k)}));
}

int exponential_select(const ColumnSums& sums, std::optional<double> eps_prime,
                       Rng& rng) {
  if (sums.empty()) throw ArgumentError("exponential_select of empty column sums");
  if (!eps_prime.has_value()) return sum_select(sums);
  if (!(*eps_prime > 0))
    throw ArgumentError("exponential_select requires eps' > 0");
  const double beta = 2.0 / *eps_prime;  // realizes P(j) ~ exp(eps'*q_j/2)
  int best = 0;
  double best_score = 0;
  for (int j = 0; j < static_cast<int>(sums.size()); ++j) {
    const double score =
        static_cast<double>(sums[j]) + sample_gumbel(beta, rng);
    if (j == 0 || score > best_score) {
      best = j;
      best_score = score;
    }
  }
  return best + 1;
}

double recompute_step(RecomputeState& state, const Record& x) {
  if (state.t >= state.T)
    throw HorizonExhaustedError("recompute mechanism past horizon T=" +
                                std::to_string(state.T));
  validate_record(x, state.d);
  ++state.t;
  add_record(state.live_sums, x);
  if (is_recompute_step(state.t, state.r, state.m)) {
    ++state.k;
    if (state.target.kind == RecomputeTarget::Kind::kSelect) {
      Rng rng = stage_rng(state.seed, state.k);
      state.cached_answer = static_cast<double>(exponential_select(
          state.live_sums,
          state.select_noiseless ? std::nullopt
                                 : std::optional<double>(state.eps_prime),
          rng));
    } else {
      const double value =
          state.target.kind == RecomputeTarget::Kind::kMaxSum
              ? static_cast<double>(max_sum(state.live_sums))
              : state.target.fn(state.live_sums, state.t);
      state.cached_answer = value + stage_noise(state.seed, state.noise, state.k);
    }
  }
  return state.cached_answer;
}

PeriodChoice optimal_period(std::int64_t T, int d, const PrivacyBudget& budget,
                            Variant variant) {
  if (T < 2) throw ArgumentError("optimal_period requires T >= 2");
  if (d < 1) throw ArgumentError("optimal_period requires d >= 1");
  const double Td = static_cast<double>(T);
  const double log2T = std::log2(Td);
  const double log2dT = std::log2(static_cast<double>(d) * Td);

  double m_real = 0;
  bool trivial = false;
  switch (budget.kind) {
    case BudgetKind::kZCDP:
      if (variant == Variant::kMaxSum) {
        trivial = budget.rho <= log2T / (Td * Td);
        m_real = std::cbrt(budget.rho) * std::pow(Td, 2.0 / 3.0) / std::cbrt(log2T);
      } else {
        trivial = budget.rho <= (log2dT / Td) * (log2dT / Td);
        m_real = std::cbrt(budget.rho) * std::pow(Td, 2.0 / 3.0) /
                 std::pow(log2dT, 2.0 / 3.0);
      }
      break;
    case BudgetKind::kPureDP:
      if (variant == Variant::kMaxSum) {
        trivial = budget.eps <= log2T / Td;
        m_real = std::sqrt(budget.eps * Td / log2T);
      } else {
        trivial = budget.eps <= log2dT / Td;
        m_real = std::sqrt(budget.eps * Td / log2dT);
      }
      break;
    case BudgetKind::kApproxDP:
      throw BudgetKindError(
          "optimal_period takes zCDP or pure-DP budgets; convert (eps,delta) "
          "via rho_from_approx_dp first");
  }
  if (trivial) return {};
  std::int64_t m = static_cast<std::int64_t>(std::floor(m_real));
  if (m < 1) return {};
  m = std::min(m, T - 1);
  std::int64_t r = (T + m - 1) / m;  // ceil(T/m)
  r = std::clamp<std::int64_t>(r, 1, T - 1);
  return {m, r};
}

}  // namespace contdp
