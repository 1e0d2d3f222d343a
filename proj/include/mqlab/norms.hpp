#pragma once

#include <cstddef>
#include <vector>

#include "mqlab/sparse.hpp"

namespace mqlab {

/// Every scalar the spectral bound is phrased in.
struct NormReport {
  double hs = 0.0;          ///< normalized Hilbert-Schmidt norm
  double linf = 0.0;        ///< max |A(y, x)|
  double delta = 1.0;
  double delta_norm = 0.0;  ///< max entry outside the witness columns
  std::vector<Index> witness_E;
  std::size_t d = 0;        ///< row support of Q^T Q
  double rho = 0.0;         ///< max(hs, delta_norm)
};

/// sqrt((1/n) sum |a_xy|^2) over stored entries.
double hs_norm(const SparseMatrix& a);

/// Largest stored |a_xy|.
double linf_norm(const SparseMatrix& a);

/// Largest k with k < n^(1 - delta); the size of the exceptional column set.
std::size_t exceptional_budget(std::size_t n, double delta);

struct DeltaNorm {
  double value = 0.0;
  std::vector<Index> witness;  ///< sorted column indices removed
};

/// inf over column sets E with |E| < n^(1-delta) of max_{y, x not in E} |a_yx|.
///
/// Removing the k columns with the largest maxima is optimal; ties go to the
/// lower column index so the witness is deterministic.
DeltaNorm delta_norm(const SparseMatrix& a, double delta);

/// max_x |{x' : (A^T A)(x, x') != 0}| from the column-sharing pattern of A.
/// Cancellation cannot occur for nonnegative matrices, which is the only case
/// this is used for.
std::size_t gram_support_degree(const SparseMatrix& a);

NormReport rho(const SparseMatrix& q, double delta);

} // namespace mqlab
