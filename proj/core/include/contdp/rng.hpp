#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace contdp {

// SplitMix64 finalizer (Steele/Lea/Vigna). Used both as the bit source of
// Rng and to derive independent child streams from (seed, key...) tuples.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic seeded generator. Samplers in noise.hpp consume bits from
// this and nothing else, so replaying a seed replays every draw bit-for-bit
// regardless of platform or standard library. stdlib engines are not used:
// their distributions are implementation-defined and the reproducibility
// contract here is bit-exact replay plus cheap keyed child streams.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on the open interval (0,1); never returns an endpoint, so
  // log() of it or of its complement is always finite.
  double next_unit() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }

  std::uint64_t operator()() { return next_u64(); }
  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return ~0ULL; }

 private:
  std::uint64_t state_;
};

// Derives a child seed from a parent seed and a key path. Distinct paths
// give independent-looking streams; used for per-trial, per-node and
// per-stage noise so results do not depend on evaluation order.
inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(seed);
  for (std::uint64_t p : path) h = mix64(h ^ mix64(p));
  return h;
}

// Domain-separation tags for derive_seed paths.
inline constexpr std::uint64_t kKeyTreeNode = 0x7472656500000001ULL;
inline constexpr std::uint64_t kKeyStage = 0x72636d7000000002ULL;
inline constexpr std::uint64_t kKeyTrial = 0x747269616c000003ULL;
inline constexpr std::uint64_t kKeyStream = 0x73747265616d0004ULL;
inline constexpr std::uint64_t kKeyAdversary = 0x6164760000000005ULL;

// Snaps a noise draw to the dyadic grid 2^-26. Grid values below 2^26 in
// magnitude are exactly representable, so adding one to an integer-valued
// double with |sum| < 2^26 is exact and therefore association-free. This
// is what lets a mechanism and its proof simulator produce bit-identical
// transcripts even though they assemble the same sums in different orders.
// The 2^-27 rounding bias is negligible against every scale in use.
inline double quantize_noise(double z) {
  return std::nearbyint(z * 0x1p26) * 0x1p-26;
}

}  // namespace contdp
