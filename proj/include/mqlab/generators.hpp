#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mqlab/permutation.hpp"
#include "mqlab/rng.hpp"
#include "mqlab/sparse.hpp"

namespace mqlab {

/// Q = p I_n + (1 - p) I_{n/2} (x) D with D the 2x2 swap: each consecutive
/// pair {2i, 2i+1} mixes with weight 1 - p. n must be even, p in (0, 1).
SparseBistochastic gen_figure1(std::size_t n, double p);

/// Simple random walk on an r-regular digraph: Q(x, y) = 1/r iff y is an
/// out-neighbor of x. Every vertex needs exactly r distinct out-neighbors and
/// exactly r in-neighbors; r >= 2.
SparseBistochastic gen_regular_digraph(const std::vector<std::vector<Index>>& adjacency, std::size_t r);

struct BirkhoffMix {
  SparseBistochastic q;
  /// True when no two permutations agree at any point, i.e. the overlap set
  /// is empty and no weights were merged.
  bool disjoint_supports;
};

/// Q = sum_i p_i M_i. Weights of coinciding arcs are added; terms with
/// p_i = 0 contribute nothing.
BirkhoffMix gen_birkhoff(std::span<const double> p, std::span<const Permutation> sigmas);

/// S = {x : sigma_i(x) = sigma_j(x) for some i != j}, sorted.
std::vector<Index> overlap_set(std::span<const Permutation> sigmas);

/// Transition matrix of f o sigma-bar on n equal cells, f(x) = r x mod 1.
/// Cell i (0-based, [i/n, (i+1)/n)) is shifted to cell sigma(i), whose image
/// under f covers cells r sigma(i), ..., r sigma(i) + r - 1 (mod n). Requires
/// n >= r >= 2.
SparseBistochastic gen_shuffle_fold(std::size_t n, std::size_t r, const Permutation& sigma);

/// Superposes r independent uniform permutations, each with weight 1/r, and
/// resamples the whole tuple whenever two of them share an arc. Throws
/// ConvergenceError after `max_attempts` rejected tuples.
///
/// The resulting law weights each 0/(1/r) bistochastic matrix by its number
/// of ordered decompositions into perfect matchings; it is invariant under
/// left multiplication by a permutation matrix.
SparseBistochastic sample_uniform_regular(std::size_t n, std::size_t r, Rng& rng,
                                          std::size_t max_attempts = 10000);

} // namespace mqlab
