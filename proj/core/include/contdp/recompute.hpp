#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>

#include "contdp/mechanism.hpp"
#include "contdp/noise.hpp"
#include "contdp/stream.hpp"

namespace contdp {

// What the mechanism recomputes every r steps. kSensitivity1Fn is a
// caller-supplied real statistic of (column sums, t) whose declared
// sensitivity is 1; it is trusted, not verified. Targets are functions of
// the maintained column sums so the mechanism keeps O(d) state.
struct RecomputeTarget {
  enum class Kind { kMaxSum, kSelect, kSensitivity1Fn };

  Kind kind = Kind::kMaxSum;
  std::function<double(const ColumnSums&, std::int64_t t)> fn;  // kSensitivity1Fn

  static RecomputeTarget MaxSum() { return {Kind::kMaxSum, nullptr}; }
  static RecomputeTarget Select() { return {Kind::kSelect, nullptr}; }
  static RecomputeTarget Sensitivity1Fn(
      std::function<double(const ColumnSums&, std::int64_t)> fn);
};

struct RecomputeState {
  std::int64_t T = 0;
  std::int64_t r = 0;   // recompute period
  std::int64_t m = 0;   // number of stages, floor((T-1)/r)
  std::int64_t k = 0;   // completed recomputations so far
  int d = 0;
  RecomputeTarget target;
  NoiseKind noise;          // real-valued targets
  double eps_prime = 0;     // per-recomputation exponential-mechanism budget (kSelect)
  bool select_noiseless = false;
  std::uint64_t seed = 0;
  std::int64_t t = 0;
  double cached_answer = 0;
  ColumnSums live_sums;
};

// m = floor((T-1)/r); per-recomputation scale from the budget split over m:
// Gaussian sigma = sqrt(m/(2 rho)) or Laplace lambda = m/eps for real
// targets, exponential mechanism with eps' = sqrt(2 rho/m) or eps/m for
// selection. ApproxDP is rejected; noise_override (incl. kNone) replaces
// the resolved noise.
RecomputeState recompute_init(std::int64_t T, std::int64_t r, int d,
                              const PrivacyBudget& budget,
                              const RecomputeTarget& target, std::uint64_t seed,
                              std::optional<NoiseKind> noise_override = std::nullopt);

// At t = (k-1)r+1, k in [m]: publish a fresh noisy target evaluation (stage
// noise keyed by k). Every other step, including the tail mr < t <= T,
// republishes the cached answer.
double recompute_step(RecomputeState& state, const Record& x);

// True iff stepping to timestep t triggers a recomputation.
bool is_recompute_step(std::int64_t t, std::int64_t r, std::int64_t m);

// The keyed stage noise: stage k under `seed` always yields the same
// quantized draw. Shared with the proof simulator.
double stage_noise(std::uint64_t seed, const NoiseKind& noise, std::int64_t k);

// Rng for stage k's selection draws (Gumbel vector). Shared with the
// proof simulator.
Rng stage_rng(std::uint64_t seed, std::int64_t k);

// Exponential-mechanism selection over qualities sums[j] with per-shot
// budget eps_prime: P(j) proportional to exp(eps_prime*sums[j]/2),
// realized as argmax of sums[j] + (2/eps_prime)*Gumbel_j. Without a budget
// (noiseless override) returns the exact smallest argmax.
int exponential_select(const ColumnSums& sums, std::optional<double> eps_prime,
                       Rng& rng);

// Error-optimal stage count for the horizon and budget, and the period
// r = ceil(T/m) clamped to [1, T-1] that realizes it. Returns m = 0 when the
// budget is so small that publishing the data-independent constant answer is
// already optimal (the trivial regime); callers switch to TrivialMechanism.
// Logs are base-2.
struct PeriodChoice {
  std::int64_t m = 0;
  std::int64_t r = 0;

  bool trivial() const { return m == 0; }
};
PeriodChoice optimal_period(std::int64_t T, int d, const PrivacyBudget& budget,
                            Variant variant);

class RecomputeMechanism final : public Mechanism {
 public:
  RecomputeMechanism(std::int64_t T, std::int64_t r, int d,
                     const PrivacyBudget& budget, const RecomputeTarget& target,
                     std::uint64_t seed,
                     std::optional<NoiseKind> noise_override = std::nullopt)
      : state_(recompute_init(T, r, d, budget, target, seed, noise_override)) {}

  double step(const Record& x) override { return recompute_step(state_, x); }
  std::int64_t horizon() const override { return state_.T; }
  int dim() const override { return state_.d; }
  Variant variant() const override {
    return state_.target.kind == RecomputeTarget::Kind::kSelect
               ? Variant::kSelect
               : Variant::kMaxSum;
  }

  const RecomputeState& state() const { return state_; }

 private:
  RecomputeState state_;
};

}  // namespace contdp
