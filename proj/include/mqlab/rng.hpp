#pragma once

#include <cstdint>

namespace mqlab {

/// xoshiro256** seeded through SplitMix64.
///
/// Integer and real draws are implemented here as well, so sequences are
/// identical on every platform.
///
/// Independent streams are derived from a (master seed, stream id) pair with
/// `Rng::stream`, which is how trial i of an experiment gets its own generator.
class Rng {
public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);

  /// Generator for stream `id` under `master`. Distinct ids give
  /// statistically independent sequences.
  static Rng stream(std::uint64_t master, std::uint64_t id);

  std::uint64_t next();
  std::uint64_t operator()() { return next(); }

  /// Uniform integer in [0, bound). Unbiased (Lemire's multiply-shift with
  /// rejection). bound must be positive.
  std::uint64_t uniform_below(std::uint64_t bound);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~std::uint64_t{0}; }

private:
  std::uint64_t s_[4];
};

/// One SplitMix64 output step applied to `x`; also used as a 64-bit mixer.
std::uint64_t splitmix64(std::uint64_t x);

} // namespace mqlab
