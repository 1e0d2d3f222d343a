#include "mqlab/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mqlab/error.hpp"

namespace mqlab {

SparseBistochastic gen_figure1(std::size_t n, double p) {
  if (n == 0 || n % 2 != 0) throw ValidationError("figure1: n must be even and positive");
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("figure1: p must lie in (0, 1)");
  std::vector<std::size_t> row_ptr(n + 1);
  std::vector<Index> cols(2 * n);
  std::vector<double> values(2 * n);
  for (std::size_t x = 0; x < n; ++x) {
    row_ptr[x] = 2 * x;
    const auto lo = static_cast<Index>(x & ~std::size_t{1});
    cols[2 * x] = lo;
    cols[2 * x + 1] = lo + 1;
    const bool even = (x % 2 == 0);
    values[2 * x] = even ? p : 1.0 - p;
    values[2 * x + 1] = even ? 1.0 - p : p;
  }
  row_ptr[n] = 2 * n;
  return SparseBistochastic(SparseMatrix(n, std::move(row_ptr), std::move(cols), std::move(values)));
}

SparseBistochastic gen_regular_digraph(const std::vector<std::vector<Index>>& adjacency, std::size_t r) {
  const std::size_t n = adjacency.size();
  if (n == 0) throw ValidationError("regular digraph: empty vertex set");
  if (r < 2) throw ValidationError("regular digraph: r must be at least 2");
  std::vector<std::size_t> in_degree(n, 0);
  std::vector<Triplet> triplets;
  triplets.reserve(n * r);
  const double w = 1.0 / static_cast<double>(r);
  for (std::size_t x = 0; x < n; ++x) {
    std::vector<Index> out = adjacency[x];
    std::sort(out.begin(), out.end());
    if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
      throw ValidationError("regular digraph: vertex " + std::to_string(x) + " has a repeated out-neighbor");
    }
    if (out.size() != r) {
      throw ValidationError("regular digraph: vertex " + std::to_string(x) + " has out-degree " +
                            std::to_string(out.size()) + ", expected " + std::to_string(r));
    }
    for (const Index y : out) {
      if (y >= n) throw ValidationError("regular digraph: vertex " + std::to_string(x) + " has out-of-range neighbor");
      ++in_degree[y];
      triplets.push_back({static_cast<Index>(x), y, w});
    }
  }
  for (std::size_t y = 0; y < n; ++y) {
    if (in_degree[y] != r) {
      throw ValidationError("regular digraph: vertex " + std::to_string(y) + " has in-degree " +
                            std::to_string(in_degree[y]) + ", expected " + std::to_string(r));
    }
  }
  return SparseBistochastic(SparseMatrix::from_triplets(n, std::move(triplets)));
}

BirkhoffMix gen_birkhoff(std::span<const double> p, std::span<const Permutation> sigmas) {
  if (p.size() != sigmas.size()) throw ValidationError("birkhoff: weight and permutation counts differ");
  if (p.size() < 2) throw ValidationError("birkhoff: need at least two permutations");
  const std::size_t n = sigmas.front().size();
  for (const auto& s : sigmas) {
    if (s.size() != n) throw ValidationError("birkhoff: permutations have different sizes");
  }
  double total = 0.0;
  for (const double pi : p) {
    if (!(pi >= 0.0) || !std::isfinite(pi)) throw ValidationError("birkhoff: weights must be nonnegative");
    total += pi;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ValidationError("birkhoff: weights do not sum to 1");

  std::vector<Triplet> triplets;
  triplets.reserve(n * p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    for (std::size_t x = 0; x < n; ++x) {
      triplets.push_back({static_cast<Index>(x), sigmas[i](static_cast<Index>(x)), p[i]});
    }
  }
  const bool disjoint = overlap_set(sigmas).empty();
  return {SparseBistochastic(SparseMatrix::from_triplets(n, std::move(triplets))), disjoint};
}

std::vector<Index> overlap_set(std::span<const Permutation> sigmas) {
  std::vector<Index> out;
  if (sigmas.empty()) return out;
  const std::size_t n = sigmas.front().size();
  std::vector<Index> images;
  images.reserve(sigmas.size());
  for (std::size_t x = 0; x < n; ++x) {
    images.clear();
    for (const auto& s : sigmas) images.push_back(s(static_cast<Index>(x)));
    std::sort(images.begin(), images.end());
    if (std::adjacent_find(images.begin(), images.end()) != images.end()) out.push_back(static_cast<Index>(x));
  }
  return out;
}

SparseBistochastic gen_shuffle_fold(std::size_t n, std::size_t r, const Permutation& sigma) {
  if (r < 2) throw ValidationError("shuffle-fold: r must be at least 2");
  if (n < r) throw ValidationError("shuffle-fold: need n >= r");
  if (sigma.size() != n) throw ValidationError("shuffle-fold: permutation size differs from n");
  const double w = 1.0 / static_cast<double>(r);
  std::vector<Triplet> triplets;
  triplets.reserve(n * r);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t base = r * sigma(static_cast<Index>(i));
    for (std::size_t k = 0; k < r; ++k) {
      triplets.push_back({static_cast<Index>(i), static_cast<Index>((base + k) % n), w});
    }
  }
  return SparseBistochastic(SparseMatrix::from_triplets(n, std::move(triplets)));
}

SparseBistochastic sample_uniform_regular(std::size_t n, std::size_t r, Rng& rng, std::size_t max_attempts) {
  if (r < 2) throw ValidationError("uniform regular: r must be at least 2");
  if (r > n) throw ValidationError("uniform regular: r must not exceed n");
  std::vector<Permutation> sigmas;
  // used[x * r + k] holds the k-th image already assigned to row x
  std::vector<Index> used(n * r);
  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    sigmas.clear();
    bool collision = false;
    for (std::size_t i = 0; i < r && !collision; ++i) {
      sigmas.push_back(sample_permutation(n, rng));
      const auto& s = sigmas.back();
      for (std::size_t x = 0; x < n && !collision; ++x) {
        const Index y = s(static_cast<Index>(x));
        for (std::size_t k = 0; k < i; ++k) {
          if (used[x * r + k] == y) {
            collision = true;
            break;
          }
        }
        used[x * r + i] = y;
      }
    }
    if (collision) continue;
    const std::vector<double> p(r, 1.0 / static_cast<double>(r));
    return gen_birkhoff(p, sigmas).q;
  }
  throw ConvergenceError("uniform regular: rejection budget of " + std::to_string(max_attempts) +
                         " attempts exceeded (r=" + std::to_string(r) + " too close to n=" + std::to_string(n) + ")");
}

} // namespace mqlab
