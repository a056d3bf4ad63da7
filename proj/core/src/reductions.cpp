#include "contdp/reductions.hpp"

#include <cmath>
#include <string>

#include "contdp/errors.hpp"

namespace contdp {

namespace {

void check_batch(const std::vector<Record>& y, std::int64_t n, int width) {
  if (n < 1) throw ArgumentError("reduction batch must be nonempty");
  if (static_cast<std::int64_t>(y.size()) != n)
    throw ArgumentError("batch size " + std::to_string(y.size()) +
                        " does not match n=" + std::to_string(n));
  for (const Record& x : y) validate_record(x, width);
}

}  // namespace

std::vector<Record> build_maxsum_reduction_stream(const std::vector<Record>& y,
                                                  std::int64_t n, int d) {
  if (d < 1) throw ArgumentError("reduction requires d >= 1");
  check_batch(y, n, d);
  std::vector<Record> stream;
  stream.reserve(static_cast<std::size_t>(2 * d * n));
  stream.insert(stream.end(), y.begin(), y.end());
  // Per attribute j: its indicator n times, then the complement n times;
  // the final attribute's complement block is omitted, totalling 2dn.
  for (int j = 0; j < d; ++j) {
    Record e(static_cast<std::size_t>(d), 0);
    e[static_cast<std::size_t>(j)] = 1;
    for (std::int64_t i = 0; i < n; ++i) stream.push_back(e);
    if (j + 1 < d) {
      Record bar(static_cast<std::size_t>(d), 1);
      bar[static_cast<std::size_t>(j)] = 0;
      for (std::int64_t i = 0; i < n; ++i) stream.push_back(bar);
    }
  }
  return stream;
}

std::vector<double> marginals_from_answers(const std::vector<double>& answers,
                                           std::int64_t n, int d) {
  if (d < 1 || n < 1) throw ArgumentError("reduction requires d >= 1, n >= 1");
  if (static_cast<std::int64_t>(answers.size()) != 2 * d * n)
    throw ArgumentError("expected 2dn answers, got " +
                        std::to_string(answers.size()));
  std::vector<double> b(static_cast<std::size_t>(d));
  for (int j = 1; j <= d; ++j)
    b[static_cast<std::size_t>(j - 1)] =
        answers[static_cast<std::size_t>(2 * j * n - 1)] / static_cast<double>(n) - j;
  return b;
}

std::vector<Record> build_kindsel_reduction_stream(const std::vector<Record>& y,
                                                   std::int64_t n, int d, int k) {
  if (d < 1 || k < 1) throw ArgumentError("reduction requires d >= 1, k >= 1");
  const int width = d * k;
  check_batch(y, n, width);
  std::vector<Record> stream;
  stream.reserve(static_cast<std::size_t>(4 * k * n));
  stream.insert(stream.end(), y.begin(), y.end());
  for (std::int64_t i = 0; i < n; ++i)
    stream.emplace_back(static_cast<std::size_t>(width), 0);
  // Per block j: the block indicator 2n times, then the complement 2n
  // times; the final block's complement is omitted, totalling 4kn.
  for (int j = 0; j < k; ++j) {
    Record v(static_cast<std::size_t>(width), 0);
    for (int c = 0; c < d; ++c) v[static_cast<std::size_t>(j * d + c)] = 1;
    for (std::int64_t i = 0; i < 2 * n; ++i) stream.push_back(v);
    if (j + 1 < k) {
      Record bar(static_cast<std::size_t>(width), 1);
      for (int c = 0; c < d; ++c) bar[static_cast<std::size_t>(j * d + c)] = 0;
      for (std::int64_t i = 0; i < 2 * n; ++i) stream.push_back(bar);
    }
  }
  return stream;
}

std::vector<int> kindsel_from_answers(const std::vector<double>& answers,
                                      std::int64_t n, int d, int k) {
  if (d < 1 || k < 1 || n < 1)
    throw ArgumentError("reduction requires d >= 1, k >= 1, n >= 1");
  if (static_cast<std::int64_t>(answers.size()) != 4 * k * n)
    throw ArgumentError("expected 4kn answers, got " +
                        std::to_string(answers.size()));
  std::vector<int> b(static_cast<std::size_t>(k));
  for (int r = 1; r <= k; ++r) {
    const double a = answers[static_cast<std::size_t>(4 * r * n - 1)];
    std::int64_t idx = std::llround(a) - static_cast<std::int64_t>(d) * (r - 1);
    if (idx < 1 || idx > d) idx = 1;
    b[static_cast<std::size_t>(r - 1)] = static_cast<int>(idx);
  }
  return b;
}

}  // namespace contdp
