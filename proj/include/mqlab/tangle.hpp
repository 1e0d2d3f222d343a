#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mqlab/permutation.hpp"
#include "mqlab/sparse.hpp"

namespace mqlab {

/// gamma = (x_1, y_1, x_2, ..., x_k, y_k, x_{k+1}) stored as xs (k + 1
/// entries) and ys (k entries). Valid when Q(y_t, x_{t+1}) > 0 for all t.
struct Path {
  std::vector<Index> xs;
  std::vector<Index> ys;

  std::size_t length() const { return ys.size(); }
  friend bool operator==(const Path&, const Path&) = default;
};

bool is_valid_path(const Path& path, const SparseMatrix& q);

/// ceil(20 sqrt(ln n)); 1 for n = 1.
std::size_t default_h(std::size_t n);

struct TangleParams {
  std::size_t h = 1;
  std::vector<Index> E;  ///< sorted exceptional set
  double delta = 1.0;
  std::size_t ell = 1;
};

/// Defaults: h = default_h(n), E = witness of delta_norm(q, delta).
TangleParams default_tangle_params(const SparseMatrix& q, double delta, std::size_t ell);

/// {x' : ((Q^T Q)^h)(x, x') > 0}, sorted. Computed as the radius-h ball
/// around x in the graph linking columns that share a row of Q; Q^T Q has a
/// positive diagonal, so positivity of its h-th power is graph distance <= h.
std::vector<Index> gram_reach(const SparseMatrix& q, Index x, std::size_t h);

/// gram_reach for every vertex at once, with O(log) membership queries.
class GramReach {
public:
  GramReach(const SparseMatrix& q, std::size_t h);

  std::size_t h() const { return h_; }
  std::span<const Index> reach(Index x) const { return reach_[x]; }
  bool contains(Index x, Index target) const;

private:
  std::size_t h_;
  std::vector<std::vector<Index>> reach_;
};

/// x_1..x_t pairwise distinct and x_{t+1} within Gram distance h of x_1.
bool is_coincidence(const Path& path, const GramReach& reach);
bool is_coincidence(const Path& path, const SparseMatrix& q, const TangleParams& params);

/// x_1..x_t pairwise distinct and x_1 = x_{t+1} in E.
bool is_E_coincidence(const Path& path, const TangleParams& params);

struct PathTangleReport {
  bool tangle_free = true;
  /// Subpath windows that are coincidences, counting every window.
  std::size_t coincidence_windows = 0;
  /// Coincidences counted once per distinct set of arcs (x_t, y_t, x_{t+1});
  /// rotations of one cycle count once. This count decides tangle-freeness.
  std::size_t coincidences = 0;
  std::size_t e_coincidences = 0;
};

/// Enumerates every subpath: contiguous windows (s..t), and shortcut windows
/// (x_s, ..., x_i, y_j, ..., x_{t+1}) for each repeated pair x_i = x_j with
/// s < i < j <= t. Tangle-free iff at most one distinct coincidence and no
/// E-coincidence.
PathTangleReport is_tangle_free_path(const Path& path, const GramReach& reach, const TangleParams& params);
PathTangleReport is_tangle_free_path(const Path& path, const SparseMatrix& q, const TangleParams& params);

struct PairTangleResult {
  bool tangle_free = true;
  /// Shortest tangled occurring path when one exists.
  std::optional<Path> witness;
  /// "two coincidences" or "E-coincidence".
  std::string clause;
  std::size_t paths_checked = 0;
};

/// Is every occurring path (y_t = sigma(x_t)) of length <= ell tangle-free?
/// Paths are grown one step at a time from every start vertex with the
/// tangle state carried along, so the first tangled path found has minimal
/// length.
PairTangleResult pair_tangle_free(const Permutation& sigma, const SparseMatrix& q, std::size_t ell,
                                  const TangleParams& params);

/// Path-sum matrices. p_free[k] = P^(k), p_under[k] = underline-P^(k) for
/// k = 0..ell (index 0 is the identity); r_mats[k - 1] = R^(ell)_k for
/// k = 1..ell.
struct PathMatrices {
  std::vector<Eigen::MatrixXd> p_free;
  std::vector<Eigen::MatrixXd> p_under;
  std::vector<Eigen::MatrixXd> r_mats;
};

struct DeskScaleLimits {
  std::size_t max_n = 12;
  std::size_t max_ell = 4;
  std::size_t max_row_support = 4;
};

/// Exact enumeration over every path in Gamma^k. Throws ValidationError
/// outside the desk-scale limits.
PathMatrices path_sum_matrices(const Permutation& sigma, const SparseMatrix& q, std::size_t ell,
                               const TangleParams& params, const DeskScaleLimits& limits = {});

struct DecompositionReport {
  std::size_t n = 0;
  std::size_t ell = 0;
  std::size_t h = 0;
  bool pair_tangle_free = false;
  /// max |P^(ell) - [Pu^(ell) + (1/n) sum Pu^(k-1) J P^(ell-k) - (1/n) sum R_k]|
  double telescoping_residual = 0.0;
  /// max |P^ell - P^(ell)|, only when the pair is ell-tangle-free
  std::optional<double> power_identity_residual;
  double restricted_power_norm = 0.0;  ///< ||P^ell restricted to 1^perp||
  double bound = 0.0;                  ///< ||Pu^(ell)|| + (1/n) sum ||R_k||
  /// bound - restricted_power_norm, only when the pair is ell-tangle-free
  std::optional<double> lemma_slack;
};

DecompositionReport verify_decomposition(const Permutation& sigma, const SparseMatrix& q, std::size_t ell,
                                         const TangleParams& params, const DeskScaleLimits& limits = {});

} // namespace mqlab
