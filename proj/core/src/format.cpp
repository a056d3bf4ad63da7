#include "contdp/format.hpp"

#include <charconv>
#include <system_error>

#include "contdp/errors.hpp"

namespace contdp {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  if (res.ec != std::errc{}) throw ArgumentError("format_double failed");
  return std::string(buf, res.ptr);
}

std::string format_int(std::int64_t v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  if (res.ec != std::errc{}) throw ArgumentError("format_int failed");
  return std::string(buf, res.ptr);
}

}  // namespace contdp
