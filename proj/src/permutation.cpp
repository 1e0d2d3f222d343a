#include "mqlab/permutation.hpp"

#include <numeric>
#include <string>
#include <utility>

#include "mqlab/error.hpp"

namespace mqlab {

Permutation::Permutation(std::vector<Index> map) : map_(std::move(map)) {
  std::vector<bool> seen(map_.size(), false);
  for (std::size_t x = 0; x < map_.size(); ++x) {
    const Index y = map_[x];
    if (y >= map_.size()) {
      throw ValidationError("permutation: image " + std::to_string(y) + " of " + std::to_string(x) +
                            " out of range for n=" + std::to_string(map_.size()));
    }
    if (seen[y]) {
      throw ValidationError("permutation: value " + std::to_string(y) + " appears twice");
    }
    seen[y] = true;
  }
}

Permutation Permutation::identity(std::size_t n) {
  std::vector<Index> map(n);
  std::iota(map.begin(), map.end(), Index{0});
  return Permutation(std::move(map));
}

Permutation Permutation::inverse() const {
  std::vector<Index> inv(map_.size());
  for (std::size_t x = 0; x < map_.size(); ++x) {
    inv[map_[x]] = static_cast<Index>(x);
  }
  return Permutation(std::move(inv));
}

bool Permutation::is_identity() const {
  for (std::size_t x = 0; x < map_.size(); ++x) {
    if (map_[x] != x) return false;
  }
  return true;
}

Permutation sample_permutation(std::size_t n, Rng& rng) {
  if (n == 0) throw ValidationError("sample_permutation: n must be positive");
  std::vector<Index> map(n);
  std::iota(map.begin(), map.end(), Index{0});
  for (std::size_t i = n - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_below(i + 1));
    std::swap(map[i], map[j]);
  }
  return Permutation(std::move(map));
}

Permutation transposition(std::size_t n, Index a, Index b) {
  if (a >= n || b >= n) throw ValidationError("transposition: index out of range");
  auto p = Permutation::identity(n);
  std::vector<Index> map(p.map().begin(), p.map().end());
  std::swap(map[a], map[b]);
  return Permutation(std::move(map));
}

} // namespace mqlab
