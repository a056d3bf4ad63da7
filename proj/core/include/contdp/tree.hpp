#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "contdp/mechanism.hpp"
#include "contdp/noise.hpp"
#include "contdp/stream.hpp"

namespace contdp {

// Closed timestep interval [lo:hi], 1-based, labelling one tree node.
struct Interval {
  std::int64_t lo = 0;
  std::int64_t hi = 0;

  auto operator<=>(const Interval&) const = default;
};

// Smallest power of two >= n.
std::int64_t next_pow2(std::int64_t n);

// floor(log2(n)) for n >= 1.
int floor_log2(std::int64_t n);

// [1:t] as disjoint consecutive dyadic intervals with strictly decreasing
// power-of-two sizes (the binary expansion of t), largest first. At most
// floor(log2 t)+1 intervals; every one is a node of the complete tree.
std::vector<Interval> dyadic_decomposition(std::int64_t t);

// Tree nodes whose interval ends exactly at t, smallest first: sizes
// 1, 2, 4, ... up to 2^(trailing zeros of t), capped by T_padded.
std::vector<Interval> nodes_completed_at(std::int64_t t, std::int64_t T_padded);

// Complete-binary-tree mechanism state. Per-node noisy sums are stored once,
// at the node's completion time, and reused verbatim by every later answer.
struct TreeState {
  std::int64_t T = 0;         // caller's horizon
  std::int64_t T_padded = 0;  // next power of two
  int levels = 0;             // floor(log2 T_padded)+1, node layers
  int d = 0;
  Variant variant = Variant::kSelect;
  NoiseKind noise;
  std::uint64_t seed = 0;
  std::int64_t t = 0;         // records consumed so far

  ColumnSums live_sums;       // exact sums of the whole current prefix
  // Exact sums of the still-open node per level (the one containing t+1).
  std::vector<ColumnSums> open_sums;
  // Completed nodes only: exact interval sum plus one fresh noise vector.
  std::map<Interval, std::vector<double>> nodes;
};

// Pads T to the next power of two and resolves the per-node noise from the
// budget: zCDP -> Gaussian(tree_sigma), pure DP -> Laplace(tree_lambda).
// ApproxDP is rejected (convert to rho first, see rho_from_approx_dp).
// noise_override replaces the resolved noise, including kNone.
TreeState tree_init(std::int64_t T, int d, const PrivacyBudget& budget,
                    Variant variant, std::uint64_t seed,
                    std::optional<NoiseKind> noise_override = std::nullopt);

// Consumes one record: every node completed at the new timestep stores its
// exact interval sum plus a fresh keyed noise vector, then the answer is
// assembled from the dyadic decomposition of [1:t]. Returns the max noisy
// sum (kMaxSum) or its smallest 1-based argmax (kSelect).
double tree_step(TreeState& state, const Record& x);

// The noisy prefix-sum vector at the current t (what the answer is read from).
std::vector<double> tree_current_sum(const TreeState& state);

// Answer published for a noisy sum vector: its maximum (kMaxSum) or the
// smallest 1-based argmax (kSelect). One code path for the mechanism and
// its simulator so coupled answers agree to the bit.
double answer_from_sum(const std::vector<double>& sum, Variant variant);

// The keyed per-node noise draw: node (lo,hi) under `seed` always yields the
// same quantized vector, independent of when or where it is drawn. This map
// is shared with the proof simulator so coupled runs match bit-for-bit.
std::vector<double> tree_node_noise(std::uint64_t seed, const NoiseKind& noise,
                                    int d, Interval node);

class TreeMechanism final : public Mechanism {
 public:
  TreeMechanism(std::int64_t T, int d, const PrivacyBudget& budget,
                Variant variant, std::uint64_t seed,
                std::optional<NoiseKind> noise_override = std::nullopt)
      : state_(tree_init(T, d, budget, variant, seed, noise_override)) {}

  double step(const Record& x) override { return tree_step(state_, x); }
  std::int64_t horizon() const override { return state_.T; }
  int dim() const override { return state_.d; }
  Variant variant() const override { return state_.variant; }

  const TreeState& state() const { return state_; }

 private:
  TreeState state_;
};

}  // namespace contdp
