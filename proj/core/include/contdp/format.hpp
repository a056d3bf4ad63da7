#pragma once

#include <cstdint>
#include <string>

namespace contdp {

// Shortest round-trip decimal form via std::to_chars; the byte-stable
// float encoding used by every CSV and transcript writer.
std::string format_double(double v);

std::string format_int(std::int64_t v);

}  // namespace contdp
