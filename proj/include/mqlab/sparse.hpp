#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mqlab/permutation.hpp"

namespace mqlab {

struct Triplet {
  Index row;
  Index col;
  double weight;
};

/// Square row-compressed matrix with sorted column indices.
///
/// Only nonzero finite values are stored, so the stored pattern is the
/// numerical support. Immutable once built.
class SparseMatrix {
public:
  SparseMatrix() = default;

  /// Builds from unordered triplets. Entries sharing a coordinate are summed;
  /// a coordinate summing to exactly zero is dropped.
  static SparseMatrix from_triplets(std::size_t n, std::vector<Triplet> triplets);

  /// Builds from raw CSR arrays, validating sortedness and values.
  SparseMatrix(std::size_t n, std::vector<std::size_t> row_ptr, std::vector<Index> cols,
               std::vector<double> values);

  static SparseMatrix identity(std::size_t n);
  static SparseMatrix from_dense(const Eigen::MatrixXd& dense);
  static SparseMatrix permutation_matrix(const Permutation& sigma);

  std::size_t size() const { return n_; }
  std::size_t nnz() const { return cols_.size(); }

  std::span<const Index> row_cols(Index row) const {
    return {cols_.data() + row_ptr_[row], cols_.data() + row_ptr_[row + 1]};
  }
  std::span<const double> row_values(Index row) const {
    return {values_.data() + row_ptr_[row], values_.data() + row_ptr_[row + 1]};
  }
  std::span<const std::size_t> row_ptr() const { return row_ptr_; }
  std::span<const Index> cols() const { return cols_; }
  std::span<const double> values() const { return values_; }

  /// Entry (row, col), zero when not stored.
  double at(Index row, Index col) const;

  /// out = A v
  void multiply(std::span<const double> v, std::span<double> out) const;
  /// out = A^T v, scatter over rows (no transpose materialized).
  void multiply_transpose(std::span<const double> v, std::span<double> out) const;

  /// Row x of the result is row sigma(x) of this matrix. Values are copied,
  /// never recomputed.
  SparseMatrix permute_rows(const Permutation& sigma) const;

  SparseMatrix transpose() const;

  /// Largest number of stored entries in any row.
  std::size_t max_row_support() const;
  std::size_t max_col_support() const;

  Eigen::MatrixXd to_dense() const;

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

private:
  std::size_t n_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<Index> cols_;
  std::vector<double> values_;
};

struct ValidationReport {
  double max_row_deviation = 0.0;
  double max_col_deviation = 0.0;
  double tolerance = 0.0;
  bool nonnegative = true;
  bool passed = false;
};

/// Row and column sum deviations from 1, computed in one pass.
ValidationReport validate_bistochastic(const SparseMatrix& a, double tol = 1e-12);

/// A SparseMatrix known to be bistochastic with positive stored weights.
class SparseBistochastic {
public:
  static constexpr double kDefaultTolerance = 1e-12;

  /// Throws ValidationError when `a` fails validate_bistochastic at `tol`.
  explicit SparseBistochastic(SparseMatrix a, double tol = kDefaultTolerance);

  const SparseMatrix& matrix() const { return a_; }
  std::size_t size() const { return a_.size(); }
  std::size_t nnz() const { return a_.nnz(); }
  Eigen::MatrixXd to_dense() const { return a_.to_dense(); }

  friend bool operator==(const SparseBistochastic&, const SparseBistochastic&) = default;

private:
  SparseMatrix a_;
};

} // namespace mqlab
