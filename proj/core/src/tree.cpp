#include "contdp/tree.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "contdp/errors.hpp"

namespace contdp {

std::int64_t next_pow2(std::int64_t n) {
  if (n < 1) throw ArgumentError("next_pow2 requires n >= 1");
  return static_cast<std::int64_t>(std::bit_ceil(static_cast<std::uint64_t>(n)));
}

int floor_log2(std::int64_t n) {
  if (n < 1) throw ArgumentError("floor_log2 requires n >= 1");
  return 63 - std::countl_zero(static_cast<std::uint64_t>(n));
}

std::vector<Interval> dyadic_decomposition(std::int64_t t) {
  if (t < 1) throw ArgumentError("dyadic_decomposition requires t >= 1");
  std::vector<Interval> out;
  std::int64_t lo = 1;
  for (int b = floor_log2(t); b >= 0; --b) {
    const std::int64_t size = std::int64_t{1} << b;
    if (t & size) {
      out.push_back({lo, lo + size - 1});
      lo += size;
    }
  }
  return out;
}

std::vector<Interval> nodes_completed_at(std::int64_t t, std::int64_t T_padded) {
  if (T_padded < 1 || std::popcount(static_cast<std::uint64_t>(T_padded)) != 1)
    throw ArgumentError("T_padded must be a power of two");
  if (t < 1 || t > T_padded)
    throw ArgumentError("nodes_completed_at requires 1 <= t <= T_padded");
  std::vector<Interval> out;
  const int depth = std::countr_zero(static_cast<std::uint64_t>(t));
  for (int h = 0; h <= depth; ++h) {
    const std::int64_t size = std::int64_t{1} << h;
    out.push_back({t - size + 1, t});
  }
  return out;
}

TreeState tree_init(std::int64_t T, int d, const PrivacyBudget& budget,
                    Variant variant, std::uint64_t seed,
                    std::optional<NoiseKind> noise_override) {
  if (T < 1) throw ArgumentError("tree mechanism requires T >= 1");
  if (d < 1) throw ArgumentError("tree mechanism requires d >= 1");
  TreeState state;
  state.T = T;
  state.T_padded = next_pow2(T);
  state.levels = floor_log2(state.T_padded) + 1;
  state.d = d;
  state.variant = variant;
  state.seed = seed;
  if (noise_override.has_value()) {
    state.noise = *noise_override;
  } else {
    switch (budget.kind) {
      case BudgetKind::kZCDP:
        state.noise = NoiseKind::Gaussian(tree_sigma(d, T, budget.rho));
        break;
      case BudgetKind::kPureDP:
        state.noise = NoiseKind::Laplace(tree_lambda(d, T, budget.eps));
        break;
      case BudgetKind::kApproxDP:
        throw BudgetKindError(
            "tree mechanism accepts zCDP or pure-DP budgets; convert "
            "(eps,delta) via rho_from_approx_dp first");
    }
  }
  state.live_sums.assign(d, 0);
  state.open_sums.assign(state.levels, ColumnSums(d, 0));
  return state;
}

std::vector<double> tree_node_noise(std::uint64_t seed, const NoiseKind& noise,
                                    int d, Interval node) {
  std::vector<double> z(d, 0.0);
  if (noise.family == NoiseKind::Family::kNone) return z;
  Rng rng(derive_seed(seed, {kKeyTreeNode, static_cast<std::uint64_t>(node.lo),
                             static_cast<std::uint64_t>(node.hi)}));
  for (int j = 0; j < d; ++j) z[j] = quantize_noise(sample_noise(noise, rng));
  return z;
}

double answer_from_sum(const std::vector<double>& sum, Variant variant) {
  if (sum.empty()) throw ArgumentError("answer_from_sum of empty sum");
  if (variant == Variant::kMaxSum) {
    return *std::max_element(sum.begin(), sum.end());
  }
  int best = 0;
  for (int j = 1; j < static_cast<int>(sum.size()); ++j)
    if (sum[j] > sum[best]) best = j;  // strict: smallest index wins ties
  return static_cast<double>(best + 1);
}

std::vector<double> tree_current_sum(const TreeState& state) {
  if (state.t < 1) throw ArgumentError("tree has consumed no records yet");
  std::vector<double> sum(state.d, 0.0);
  for (Interval iv : dyadic_decomposition(state.t)) {
    const std::vector<double>& v = state.nodes.at(iv);
    for (int j = 0; j < state.d; ++j) sum[j] += v[j];
  }
  return sum;
}

double tree_step(TreeState& state, const Record& x) {
  if (state.t >= state.T)
    throw HorizonExhaustedError("tree mechanism past horizon T=" +
                                std::to_string(state.T));
  validate_record(x, state.d);
  ++state.t;
  add_record(state.live_sums, x);
  for (ColumnSums& open : state.open_sums) add_record(open, x);
  for (Interval node : nodes_completed_at(state.t, state.T_padded)) {
    const int h = floor_log2(node.hi - node.lo + 1);
    std::vector<double> value = tree_node_noise(state.seed, state.noise, state.d, node);
    for (int j = 0; j < state.d; ++j)
      value[j] = static_cast<double>(state.open_sums[h][j]) + value[j];
    state.nodes.emplace(node, std::move(value));
    std::fill(state.open_sums[h].begin(), state.open_sums[h].end(), 0);
  }
  return answer_from_sum(tree_current_sum(state), state.variant);
}

}  // namespace contdp
