#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "contdp/errors.hpp"

namespace contdp {

// One record: d binary attributes, each entry 0 or 1.
using Bit = std::uint8_t;
using Record = std::vector<Bit>;

// Which statistic a mechanism publishes each step: the maximum column sum
// (a real) or the smallest 1-based index attaining it.
enum class Variant { kMaxSum, kSelect };

// The records seen so far; t() is the number of timesteps consumed.
struct StreamPrefix {
  std::vector<Record> records;

  std::int64_t t() const { return static_cast<std::int64_t>(records.size()); }
  int d() const {
    if (records.empty()) throw ArgumentError("empty prefix has no dimension");
    return static_cast<int>(records.front().size());
  }
};

// Exact per-column counts; entry j is the number of records with bit j set.
using ColumnSums = std::vector<std::int64_t>;

void validate_record(const Record& x, int d);

ColumnSums column_sums(const StreamPrefix& prefix);

// Incremental update used by mechanisms that keep O(d) state instead of the
// full prefix. sums.size() must equal x.size().
void add_record(ColumnSums& sums, const Record& x);

std::int64_t max_sum(const ColumnSums& sums);
std::int64_t max_sum_exact(const StreamPrefix& prefix);

// Smallest 1-based index attaining the maximum column sum.
int sum_select(const ColumnSums& sums);
int sum_select_exact(const StreamPrefix& prefix);

// |MaxSum - answer|.
double err_maxsum(const ColumnSums& sums, double answer);
double err_maxsum(const StreamPrefix& prefix, double answer);

// MaxSum - sums[index]: the deficit of the chosen column, always >= 0.
// index is 1-based.
std::int64_t err_sumselect(const ColumnSums& sums, int index);
std::int64_t err_sumselect(const StreamPrefix& prefix, int index);

// Per-step error for a published answer under the chosen metric; for
// kSelect the answer is the index rounded from the published real.
double step_error(const ColumnSums& sums, double answer, Variant variant);

// Maximum per-step error over one run, from per-step column-sum snapshots
// and published answers. Throws on an empty run.
double max_error_over_run(
    const std::vector<std::pair<ColumnSums, double>>& run, Variant variant);

}  // namespace contdp
