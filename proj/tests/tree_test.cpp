#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "contdp/errors.hpp"
#include "contdp/noise.hpp"
#include "contdp/rng.hpp"
#include "contdp/stream.hpp"
#include "contdp/tree.hpp"

using namespace contdp;

namespace {

std::vector<Record> random_records(std::int64_t T, int d, Rng& rng) {
  std::vector<Record> out(static_cast<std::size_t>(T));
  for (Record& x : out) {
    x.resize(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j)
      x[static_cast<std::size_t>(j)] = static_cast<Bit>(rng.next_u64() & 1);
  }
  return out;
}

std::vector<Record> records_from_mask(std::uint64_t mask, std::int64_t T, int d) {
  std::vector<Record> out(static_cast<std::size_t>(T));
  int bit = 0;
  for (Record& x : out) {
    x.resize(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j)
      x[static_cast<std::size_t>(j)] = static_cast<Bit>((mask >> bit++) & 1);
  }
  return out;
}

// Every aligned node of the complete tree over [1, T_padded].
std::vector<Interval> all_aligned_nodes(std::int64_t T_padded) {
  std::vector<Interval> out;
  for (std::int64_t size = 1; size <= T_padded; size *= 2)
    for (std::int64_t lo = 1; lo + size - 1 <= T_padded; lo += size)
      out.push_back({lo, lo + size - 1});
  return out;
}

}  // namespace

TEST_CASE("next_pow2 and floor_log2 on frozen values") {
  CHECK(next_pow2(1) == 1);
  CHECK(next_pow2(2) == 2);
  CHECK(next_pow2(3) == 4);
  CHECK(next_pow2(5) == 8);
  CHECK(next_pow2(6) == 8);
  CHECK(next_pow2(1023) == 1024);
  CHECK(next_pow2(1024) == 1024);
  CHECK_THROWS_AS(next_pow2(0), ArgumentError);
  CHECK(floor_log2(1) == 0);
  CHECK(floor_log2(2) == 1);
  CHECK(floor_log2(3) == 1);
  CHECK(floor_log2(4) == 2);
  CHECK(floor_log2(1024) == 10);
  CHECK_THROWS_AS(floor_log2(0), ArgumentError);
}

TEST_CASE("dyadic decomposition on frozen timesteps") {
  CHECK(dyadic_decomposition(7) ==
        std::vector<Interval>{{1, 4}, {5, 6}, {7, 7}});
  CHECK(dyadic_decomposition(1) == std::vector<Interval>{{1, 1}});
  CHECK(dyadic_decomposition(6) == std::vector<Interval>{{1, 4}, {5, 6}});
  CHECK(dyadic_decomposition(4) == std::vector<Interval>{{1, 4}});
  CHECK_THROWS_AS(dyadic_decomposition(0), ArgumentError);
}

TEST_CASE("dyadic decomposition properties over [1, 4096]") {
  for (std::int64_t t = 1; t <= 4096; ++t) {
    const std::vector<Interval> parts = dyadic_decomposition(t);
    REQUIRE(!parts.empty());
    CHECK(parts.front().lo == 1);
    CHECK(parts.back().hi == t);
    std::int64_t prev_size = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const std::int64_t size = parts[i].hi - parts[i].lo + 1;
      CHECK(std::popcount(static_cast<std::uint64_t>(size)) == 1);
      if (i > 0) {
        CHECK(parts[i].lo == parts[i - 1].hi + 1);  // consecutive, disjoint
        CHECK(size < prev_size);                    // strictly decreasing
      }
      prev_size = size;
    }
    CHECK(static_cast<int>(parts.size()) ==
          std::popcount(static_cast<std::uint64_t>(t)));
    CHECK(static_cast<int>(parts.size()) <= floor_log2(t) + 1);
  }
}

TEST_CASE("nodes_completed_at on frozen timesteps") {
  CHECK(nodes_completed_at(4, 8) ==
        std::vector<Interval>{{4, 4}, {3, 4}, {1, 4}});
  CHECK(nodes_completed_at(1, 8) == std::vector<Interval>{{1, 1}});
  CHECK(nodes_completed_at(8, 8) ==
        std::vector<Interval>{{8, 8}, {7, 8}, {5, 8}, {1, 8}});
  CHECK(nodes_completed_at(6, 8) == std::vector<Interval>{{6, 6}, {5, 6}});
  CHECK_THROWS_AS(nodes_completed_at(1, 6), ArgumentError);   // not a power of two
  CHECK_THROWS_AS(nodes_completed_at(0, 8), ArgumentError);
  CHECK_THROWS_AS(nodes_completed_at(9, 8), ArgumentError);
}

TEST_CASE("nodes_completed_at count matches the trailing zeros of t") {
  for (std::int64_t t = 1; t <= 64; ++t) {
    const auto nodes = nodes_completed_at(t, 64);
    CHECK(static_cast<int>(nodes.size()) ==
          std::countr_zero(static_cast<std::uint64_t>(t)) + 1);
    for (const Interval iv : nodes) CHECK(iv.hi == t);
  }
}

TEST_CASE("tree_init pads the horizon and resolves noise from the budget") {
  const TreeState s6 = tree_init(6, 2, PrivacyBudget::ZCDP(1.0), Variant::kSelect, 0);
  CHECK(s6.T == 6);
  CHECK(s6.T_padded == 8);
  CHECK(s6.levels == 4);
  const TreeState s8 = tree_init(8, 4, PrivacyBudget::ZCDP(0.5), Variant::kMaxSum, 0);
  CHECK(s8.noise.family == NoiseKind::Family::kGaussian);
  CHECK(s8.noise.scale == 4.0);  // tree_sigma(4, 8, 0.5)
  const TreeState s1 = tree_init(1, 1, PrivacyBudget::ZCDP(1.0), Variant::kSelect, 0);
  CHECK(s1.levels == 1);
  const TreeState sp = tree_init(4, 3, PrivacyBudget::PureDP(1.0), Variant::kMaxSum, 0);
  CHECK(sp.noise.family == NoiseKind::Family::kLaplace);
  CHECK(sp.noise.scale == 9.0);  // tree_lambda(3, 4, 1)
  const TreeState sn = tree_init(8, 2, PrivacyBudget::ZCDP(1.0), Variant::kSelect, 0,
                                 NoiseKind::None());
  CHECK(sn.noise.family == NoiseKind::Family::kNone);
  CHECK_THROWS_AS(tree_init(8, 1, PrivacyBudget::ApproxDP(1.0, 1e-6),
                            Variant::kSelect, 0),
                  BudgetKindError);
  CHECK_THROWS_AS(tree_init(0, 1, PrivacyBudget::ZCDP(1.0), Variant::kSelect, 0),
                  ArgumentError);
  CHECK_THROWS_AS(tree_init(8, 0, PrivacyBudget::ZCDP(1.0), Variant::kSelect, 0),
                  ArgumentError);
}

TEST_CASE("noiseless tree answers frozen streams") {
  TreeState sel = tree_init(4, 2, PrivacyBudget::ZCDP(1.0), Variant::kSelect, 7,
                            NoiseKind::None());
  CHECK(tree_step(sel, {1, 0}) == 1.0);
  CHECK(tree_step(sel, {1, 0}) == 1.0);
  CHECK(tree_step(sel, {0, 1}) == 1.0);

  TreeState ms = tree_init(4, 2, PrivacyBudget::ZCDP(1.0), Variant::kMaxSum, 7,
                           NoiseKind::None());
  CHECK(tree_step(ms, {1, 0}) == 1.0);
  CHECK(tree_step(ms, {1, 0}) == 2.0);
  CHECK(tree_step(ms, {0, 1}) == 2.0);

  TreeState zero = tree_init(4, 2, PrivacyBudget::ZCDP(1.0), Variant::kSelect, 7,
                             NoiseKind::None());
  for (int t = 0; t < 4; ++t) CHECK(tree_step(zero, {0, 0}) == 1.0);  // tie
}

TEST_CASE("noisy select with d=1 is always index 1") {
  TreeMechanism mech(32, 1, PrivacyBudget::ZCDP(0.01), Variant::kSelect, 5);
  for (int t = 0; t < 32; ++t) CHECK(mech.step({1}) == 1.0);
}

TEST_CASE("noiseless tree equals the exact oracles") {
  // Exhaustive for small shapes; the acceptance gate runs the full grid.
  for (int d = 1; d <= 2; ++d) {
    for (std::int64_t T = 1; T <= 5; ++T) {
      const std::uint64_t total = 1ULL << (d * T);
      for (std::uint64_t mask = 0; mask < total; ++mask) {
        const std::vector<Record> records = records_from_mask(mask, T, d);
        TreeState sel = tree_init(T, d, PrivacyBudget::ZCDP(1.0),
                                  Variant::kSelect, mask, NoiseKind::None());
        TreeState ms = tree_init(T, d, PrivacyBudget::ZCDP(1.0),
                                 Variant::kMaxSum, mask, NoiseKind::None());
        StreamPrefix p;
        for (const Record& x : records) {
          p.records.push_back(x);
          REQUIRE(tree_step(sel, x) == static_cast<double>(sum_select_exact(p)));
          REQUIRE(tree_step(ms, x) == static_cast<double>(max_sum_exact(p)));
        }
      }
    }
  }
  Rng rng(404);
  for (int iter = 0; iter < 50; ++iter) {
    const std::vector<Record> records = random_records(64, 8, rng);
    TreeState sel = tree_init(64, 8, PrivacyBudget::ZCDP(1.0), Variant::kSelect,
                              rng.next_u64(), NoiseKind::None());
    StreamPrefix p;
    for (const Record& x : records) {
      p.records.push_back(x);
      REQUIRE(tree_step(sel, x) == static_cast<double>(sum_select_exact(p)));
    }
  }
}

TEST_CASE("a node exists exactly when its interval has closed") {
  TreeState state = tree_init(8, 2, PrivacyBudget::ZCDP(1.0), Variant::kSelect,
                              123);
  const std::vector<Interval> aligned = all_aligned_nodes(8);
  for (std::int64_t t = 1; t <= 8; ++t) {
    tree_step(state, {1, 0});
    for (const Interval iv : aligned)
      CHECK(state.nodes.contains(iv) == (iv.hi <= t));
  }
}

TEST_CASE("each timestep is covered by exactly `levels` completed nodes") {
  TreeState state = tree_init(8, 1, PrivacyBudget::ZCDP(1.0), Variant::kMaxSum,
                              17);
  for (int t = 0; t < 8; ++t) tree_step(state, {1});
  for (std::int64_t s = 1; s <= 8; ++s) {
    int covering = 0;
    for (const auto& [iv, value] : state.nodes)
      if (iv.lo <= s && s <= iv.hi) ++covering;
    CHECK(covering == state.levels);
  }

  // With T below the padded horizon the topmost nodes never close.
  TreeState short_run = tree_init(6, 1, PrivacyBudget::ZCDP(1.0),
                                  Variant::kMaxSum, 17);
  for (int t = 0; t < 6; ++t) tree_step(short_run, {1});
  CHECK(!short_run.nodes.contains(Interval{1, 8}));
  for (std::int64_t s = 1; s <= 6; ++s) {
    int covering = 0;
    for (const auto& [iv, value] : short_run.nodes)
      if (iv.lo <= s && s <= iv.hi) ++covering;
    CHECK(covering <= short_run.levels);
  }
}

TEST_CASE("node values are drawn once and never redrawn") {
  TreeState state = tree_init(8, 3, PrivacyBudget::ZCDP(1.0), Variant::kMaxSum,
                              2718);
  Rng rng(5);
  std::vector<Record> records = random_records(8, 3, rng);
  for (int t = 0; t < 4; ++t) tree_step(state, records[static_cast<std::size_t>(t)]);
  const std::map<Interval, std::vector<double>> snapshot = state.nodes;
  for (int t = 4; t < 8; ++t) tree_step(state, records[static_cast<std::size_t>(t)]);
  for (const auto& [iv, value] : snapshot) {
    REQUIRE(state.nodes.contains(iv));
    CHECK(state.nodes.at(iv) == value);  // bitwise, no redraw
  }

  // Replaying the same seed reproduces every stored node bit-for-bit.
  TreeState replay = tree_init(8, 3, PrivacyBudget::ZCDP(1.0), Variant::kMaxSum,
                               2718);
  for (const Record& x : records) tree_step(replay, x);
  CHECK(replay.nodes == state.nodes);
}

TEST_CASE("noiseless node values are the exact interval sums") {
  Rng rng(6);
  const std::vector<Record> records = random_records(8, 2, rng);
  TreeState state = tree_init(8, 2, PrivacyBudget::ZCDP(1.0), Variant::kMaxSum,
                              0, NoiseKind::None());
  for (const Record& x : records) tree_step(state, x);
  for (const auto& [iv, value] : state.nodes) {
    const std::vector<Record> slice(
        records.begin() + static_cast<std::ptrdiff_t>(iv.lo - 1),
        records.begin() + static_cast<std::ptrdiff_t>(iv.hi));
    const ColumnSums exact = column_sums(StreamPrefix{slice});
    REQUIRE(value.size() == exact.size());
    for (std::size_t j = 0; j < exact.size(); ++j)
      CHECK(value[j] == static_cast<double>(exact[j]));
  }
}

TEST_CASE("tree_current_sum is the dyadic assembly of stored nodes") {
  TreeState state = tree_init(8, 2, PrivacyBudget::ZCDP(1.0), Variant::kMaxSum,
                              99);
  CHECK_THROWS_AS(tree_current_sum(state), ArgumentError);  // no records yet
  Rng rng(8);
  const std::vector<Record> records = random_records(7, 2, rng);
  StreamPrefix p;
  for (const Record& x : records) {
    tree_step(state, x);
    p.records.push_back(x);
    std::vector<double> expected(2, 0.0);
    for (const Interval iv : dyadic_decomposition(state.t))
      for (int j = 0; j < 2; ++j)
        expected[static_cast<std::size_t>(j)] +=
            state.nodes.at(iv)[static_cast<std::size_t>(j)];
    CHECK(tree_current_sum(state) == expected);
  }
}

TEST_CASE("tree mechanism enforces horizon and dimension") {
  TreeMechanism mech(2, 2, PrivacyBudget::ZCDP(1.0), Variant::kSelect, 0);
  CHECK_THROWS_AS(mech.step({1}), DimensionMismatchError);
  mech.step({1, 0});
  mech.step({1, 0});
  CHECK_THROWS_AS(mech.step({1, 0}), HorizonExhaustedError);
}

TEST_CASE("answer_from_sum variants and ties") {
  CHECK(answer_from_sum({0.5, 2.5, 2.5}, Variant::kMaxSum) == 2.5);
  CHECK(answer_from_sum({0.5, 2.5, 2.5}, Variant::kSelect) == 2.0);
  CHECK(answer_from_sum({7.0}, Variant::kSelect) == 1.0);
  CHECK(answer_from_sum({-1.0, -3.0}, Variant::kMaxSum) == -1.0);
  CHECK_THROWS_AS(answer_from_sum({}, Variant::kMaxSum), ArgumentError);
}

TEST_CASE("tree_node_noise is keyed by node and quantized") {
  const NoiseKind noise = NoiseKind::Gaussian(3.0);
  const std::vector<double> a = tree_node_noise(42, noise, 4, {3, 4});
  CHECK(a == tree_node_noise(42, noise, 4, {3, 4}));
  CHECK(a != tree_node_noise(42, noise, 4, {1, 4}));
  CHECK(a != tree_node_noise(43, noise, 4, {3, 4}));
  for (const double v : a) CHECK(v * 0x1p26 == std::nearbyint(v * 0x1p26));
  const std::vector<double> z = tree_node_noise(42, NoiseKind::None(), 3, {1, 2});
  CHECK(z == std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("pure-DP budget resolution equals an explicit Laplace override") {
  Rng rng(21);
  const std::vector<Record> records = random_records(16, 2, rng);
  TreeMechanism from_budget(16, 2, PrivacyBudget::PureDP(0.7), Variant::kMaxSum,
                            11);
  TreeMechanism from_override(16, 2, PrivacyBudget::ZCDP(1.0), Variant::kMaxSum,
                              11, NoiseKind::Laplace(tree_lambda(2, 16, 0.7)));
  for (const Record& x : records)
    CHECK(from_budget.step(x) == from_override.step(x));
}

TEST_CASE("noisy answers differ from exact answers under real noise") {
  TreeMechanism mech(64, 1, PrivacyBudget::ZCDP(0.5), Variant::kMaxSum, 3);
  StreamPrefix p;
  int exact_hits = 0;
  for (int t = 0; t < 64; ++t) {
    p.records.push_back({1});
    if (mech.step({1}) == static_cast<double>(max_sum_exact(p))) ++exact_hits;
  }
  CHECK(exact_hits < 8);  // continuous noise almost never lands on the truth
}
