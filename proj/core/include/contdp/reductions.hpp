#pragma once

#include <cstdint>
#include <vector>

#include "contdp/stream.hpp"

namespace contdp {

// Stream of 2dn records that turns a continual MaxSum mechanism into a
// one-shot marginals estimator: y, then per attribute j the indicator
// records e_j n times followed by their complements, the last attribute
// without the complement block.
std::vector<Record> build_maxsum_reduction_stream(const std::vector<Record>& y,
                                                  std::int64_t n, int d);

// Reads the marginal estimates off the mechanism's answer sequence:
// b_j = answers[2jn]/n - j (1-based positions).
std::vector<double> marginals_from_answers(const std::vector<double>& answers,
                                           std::int64_t n, int d);

// Stream of 4kn records over d*k attributes that turns a continual
// SumSelect mechanism into a per-block selector: y, n all-zero records,
// then per block j the block indicator v_j 2n times followed by its
// complement, the last block without the complement.
std::vector<Record> build_kindsel_reduction_stream(const std::vector<Record>& y,
                                                   std::int64_t n, int d, int k);

// Per-block selections: b_r = answers[4rn] - d(r-1), clamped to 1 when the
// recovered index falls outside [1, d].
std::vector<int> kindsel_from_answers(const std::vector<double>& answers,
                                      std::int64_t n, int d, int k);

}  // namespace contdp
