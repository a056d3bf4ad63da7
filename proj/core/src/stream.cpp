#include "contdp/stream.hpp"

#include <cmath>
#include <cstdint>

namespace contdp {

void validate_record(const Record& x, int d) {
  if (static_cast<int>(x.size()) != d)
    throw DimensionMismatchError("record has " + std::to_string(x.size()) +
                                 " attributes, expected " + std::to_string(d));
  for (Bit b : x)
    if (b != 0 && b != 1) throw ArgumentError("record attributes must be 0 or 1");
}

ColumnSums column_sums(const StreamPrefix& prefix) {
  if (prefix.records.empty()) throw ArgumentError("column_sums of empty prefix");
  const int d = prefix.d();
  ColumnSums sums(d, 0);
  for (const Record& x : prefix.records) {
    validate_record(x, d);
    add_record(sums, x);
  }
  return sums;
}

void add_record(ColumnSums& sums, const Record& x) {
  if (sums.size() != x.size())
    throw DimensionMismatchError("record width does not match column sums");
  for (std::size_t j = 0; j < x.size(); ++j) sums[j] += x[j];
}

std::int64_t max_sum(const ColumnSums& sums) {
  if (sums.empty()) throw ArgumentError("max_sum of empty column sums");
  std::int64_t best = sums[0];
  for (std::int64_t s : sums)
    if (s > best) best = s;
  return best;
}

std::int64_t max_sum_exact(const StreamPrefix& prefix) {
  return max_sum(column_sums(prefix));
}

int sum_select(const ColumnSums& sums) {
  if (sums.empty()) throw ArgumentError("sum_select of empty column sums");
  int best = 0;
  for (int j = 1; j < static_cast<int>(sums.size()); ++j)
    if (sums[j] > sums[best]) best = j;
  return best + 1;
}

int sum_select_exact(const StreamPrefix& prefix) {
  return sum_select(column_sums(prefix));
}

double err_maxsum(const ColumnSums& sums, double answer) {
  return std::abs(static_cast<double>(max_sum(sums)) - answer);
}

double err_maxsum(const StreamPrefix& prefix, double answer) {
  return err_maxsum(column_sums(prefix), answer);
}

std::int64_t err_sumselect(const ColumnSums& sums, int index) {
  if (index < 1 || index > static_cast<int>(sums.size()))
    throw ArgumentError("selection index " + std::to_string(index) +
                        " out of range [1, " + std::to_string(sums.size()) + "]");
  return max_sum(sums) - sums[index - 1];
}

std::int64_t err_sumselect(const StreamPrefix& prefix, int index) {
  return err_sumselect(column_sums(prefix), index);
}

double step_error(const ColumnSums& sums, double answer, Variant variant) {
  if (variant == Variant::kMaxSum) return err_maxsum(sums, answer);
  return static_cast<double>(
      err_sumselect(sums, static_cast<int>(std::llround(answer))));
}

double max_error_over_run(
    const std::vector<std::pair<ColumnSums, double>>& run, Variant variant) {
  if (run.empty()) throw ArgumentError("max_error_over_run of empty run");
  double worst = 0;
  for (const auto& [sums, answer] : run) {
    double e = step_error(sums, answer, variant);
    if (e > worst) worst = e;
  }
  return worst;
}

}  // namespace contdp
