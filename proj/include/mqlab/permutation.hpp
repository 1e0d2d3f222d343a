#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mqlab/rng.hpp"

namespace mqlab {

using Index = std::uint32_t;

/// Bijection on {0, ..., n-1}; position x stores sigma(x).
///
/// The associated permutation matrix is M with M(x, y) = 1 iff sigma(x) = y.
class Permutation {
public:
  /// Takes ownership of `map` after checking it is a bijection.
  explicit Permutation(std::vector<Index> map);

  static Permutation identity(std::size_t n);

  std::size_t size() const { return map_.size(); }
  Index operator()(Index x) const { return map_[x]; }
  std::span<const Index> map() const { return map_; }

  Permutation inverse() const;
  bool is_identity() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;

private:
  std::vector<Index> map_;
};

/// Uniform random permutation by Fisher-Yates; deterministic in the rng state.
Permutation sample_permutation(std::size_t n, Rng& rng);

/// Transposition of a and b on n points.
Permutation transposition(std::size_t n, Index a, Index b);

} // namespace mqlab
