#pragma once

#include <cstdint>
#include <random>

namespace fimci {

/// splitmix64 finalizer; the basis for all seed derivation.
std::uint64_t splitmix64(std::uint64_t x);

/// Derives a child seed from (seed, stream). Used to hand each Monte Carlo
/// replication (and each purpose within it) an independent stream, so results
/// do not depend on execution order.
std::uint64_t seed_mix(std::uint64_t seed, std::uint64_t stream);

std::uint64_t seed_mix(std::uint64_t seed, std::uint64_t s1, std::uint64_t s2);

/// Seeded generator with explicit variate mappings. The engine output is
/// specified by the standard; the uniform/normal transforms are ours, so a
/// stream is reproducible bit-for-bit across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Uniform on the open interval (0,1).
  double uniform01() {
    const std::uint64_t bits = engine_() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double prob) { return uniform01() < prob; }

  /// Standard normal by inversion of the high-accuracy quantile.
  double normal();

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fimci
