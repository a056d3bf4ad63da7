#include "contdp/mechanism.hpp"

#include "contdp/errors.hpp"

namespace contdp {

TrivialMechanism::TrivialMechanism(std::int64_t T, int d, Variant variant)
    : T_(T), d_(d), variant_(variant) {
  if (T < 1) throw ArgumentError("horizon must be >= 1");
  if (d < 1) throw ArgumentError("dimension must be >= 1");
}

double TrivialMechanism::step(const Record& x) {
  if (t_ >= T_) throw HorizonExhaustedError("trivial mechanism past horizon");
  validate_record(x, d_);
  ++t_;
  return variant_ == Variant::kMaxSum ? 0.0 : 1.0;
}

}  // namespace contdp
