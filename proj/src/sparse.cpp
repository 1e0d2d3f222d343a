#include "mqlab/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "mqlab/error.hpp"

namespace mqlab {

SparseMatrix::SparseMatrix(std::size_t n, std::vector<std::size_t> row_ptr, std::vector<Index> cols,
                           std::vector<double> values)
    : n_(n), row_ptr_(std::move(row_ptr)), cols_(std::move(cols)), values_(std::move(values)) {
  if (row_ptr_.size() != n_ + 1 || row_ptr_.front() != 0 || row_ptr_.back() != cols_.size() ||
      cols_.size() != values_.size()) {
    throw ValidationError("sparse matrix: inconsistent CSR arrays");
  }
  for (std::size_t r = 0; r < n_; ++r) {
    if (row_ptr_[r] > row_ptr_[r + 1]) throw ValidationError("sparse matrix: row pointers decrease");
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      if (cols_[k] >= n_) {
        throw ValidationError("sparse matrix: column " + std::to_string(cols_[k]) + " out of range in row " +
                              std::to_string(r));
      }
      if (k > row_ptr_[r] && cols_[k] <= cols_[k - 1]) {
        throw ValidationError("sparse matrix: columns not strictly increasing in row " + std::to_string(r));
      }
      if (!std::isfinite(values_[k]) || values_[k] == 0.0) {
        throw ValidationError("sparse matrix: zero or non-finite value in row " + std::to_string(r));
      }
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(std::size_t n, std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row >= n || t.col >= n) throw ValidationError("sparse matrix: triplet index out of range");
  }
  std::sort(triplets.begin(), triplets.end(),
            [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  std::vector<std::size_t> row_ptr(n + 1, 0);
  std::vector<Index> cols;
  std::vector<double> values;
  cols.reserve(triplets.size());
  values.reserve(triplets.size());
  for (std::size_t k = 0; k < triplets.size();) {
    const auto& t = triplets[k];
    double w = 0.0;
    std::size_t j = k;
    for (; j < triplets.size() && triplets[j].row == t.row && triplets[j].col == t.col; ++j) {
      w += triplets[j].weight;
    }
    if (w != 0.0) {
      cols.push_back(t.col);
      values.push_back(w);
      ++row_ptr[t.row + 1];
    }
    k = j;
  }
  for (std::size_t r = 0; r < n; ++r) row_ptr[r + 1] += row_ptr[r];
  return SparseMatrix(n, std::move(row_ptr), std::move(cols), std::move(values));
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<std::size_t> row_ptr(n + 1);
  std::vector<Index> cols(n);
  for (std::size_t i = 0; i <= n; ++i) row_ptr[i] = i;
  for (std::size_t i = 0; i < n; ++i) cols[i] = static_cast<Index>(i);
  return SparseMatrix(n, std::move(row_ptr), std::move(cols), std::vector<double>(n, 1.0));
}

SparseMatrix SparseMatrix::from_dense(const Eigen::MatrixXd& dense) {
  if (dense.rows() != dense.cols()) throw ValidationError("sparse matrix: dense input not square");
  const auto n = static_cast<std::size_t>(dense.rows());
  std::vector<Triplet> triplets;
  for (Eigen::Index r = 0; r < dense.rows(); ++r) {
    for (Eigen::Index c = 0; c < dense.cols(); ++c) {
      if (dense(r, c) != 0.0) triplets.push_back({static_cast<Index>(r), static_cast<Index>(c), dense(r, c)});
    }
  }
  return from_triplets(n, std::move(triplets));
}

SparseMatrix SparseMatrix::permutation_matrix(const Permutation& sigma) {
  const std::size_t n = sigma.size();
  std::vector<std::size_t> row_ptr(n + 1);
  for (std::size_t i = 0; i <= n; ++i) row_ptr[i] = i;
  std::vector<Index> cols(sigma.map().begin(), sigma.map().end());
  return SparseMatrix(n, std::move(row_ptr), std::move(cols), std::vector<double>(n, 1.0));
}

double SparseMatrix::at(Index row, Index col) const {
  const auto c = row_cols(row);
  const auto it = std::lower_bound(c.begin(), c.end(), col);
  if (it == c.end() || *it != col) return 0.0;
  return row_values(row)[static_cast<std::size_t>(it - c.begin())];
}

void SparseMatrix::multiply(std::span<const double> v, std::span<double> out) const {
  if (v.size() != n_ || out.size() != n_) throw ValidationError("multiply: dimension mismatch");
  for (std::size_t r = 0; r < n_; ++r) {
    double sum = 0.0;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) sum += values_[k] * v[cols_[k]];
    out[r] = sum;
  }
}

void SparseMatrix::multiply_transpose(std::span<const double> v, std::span<double> out) const {
  if (v.size() != n_ || out.size() != n_) throw ValidationError("multiply_transpose: dimension mismatch");
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t r = 0; r < n_; ++r) {
    const double vr = v[r];
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) out[cols_[k]] += values_[k] * vr;
  }
}

SparseMatrix SparseMatrix::permute_rows(const Permutation& sigma) const {
  if (sigma.size() != n_) throw ValidationError("permute_rows: dimension mismatch");
  std::vector<std::size_t> row_ptr(n_ + 1, 0);
  std::vector<Index> cols;
  std::vector<double> values;
  cols.reserve(cols_.size());
  values.reserve(values_.size());
  for (std::size_t x = 0; x < n_; ++x) {
    const Index src = sigma(static_cast<Index>(x));
    cols.insert(cols.end(), cols_.begin() + row_ptr_[src], cols_.begin() + row_ptr_[src + 1]);
    values.insert(values.end(), values_.begin() + row_ptr_[src], values_.begin() + row_ptr_[src + 1]);
    row_ptr[x + 1] = cols.size();
  }
  return SparseMatrix(n_, std::move(row_ptr), std::move(cols), std::move(values));
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<std::size_t> row_ptr(n_ + 1, 0);
  for (const Index c : cols_) ++row_ptr[c + 1];
  for (std::size_t r = 0; r < n_; ++r) row_ptr[r + 1] += row_ptr[r];
  std::vector<Index> cols(cols_.size());
  std::vector<double> values(values_.size());
  std::vector<std::size_t> fill(row_ptr.begin(), row_ptr.end() - 1);
  for (std::size_t r = 0; r < n_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const std::size_t dst = fill[cols_[k]]++;
      cols[dst] = static_cast<Index>(r);
      values[dst] = values_[k];
    }
  }
  return SparseMatrix(n_, std::move(row_ptr), std::move(cols), std::move(values));
}

std::size_t SparseMatrix::max_row_support() const {
  std::size_t best = 0;
  for (std::size_t r = 0; r < n_; ++r) best = std::max(best, row_ptr_[r + 1] - row_ptr_[r]);
  return best;
}

std::size_t SparseMatrix::max_col_support() const {
  std::vector<std::size_t> count(n_, 0);
  for (const Index c : cols_) ++count[c];
  return count.empty() ? 0 : *std::max_element(count.begin(), count.end());
}

Eigen::MatrixXd SparseMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
  for (std::size_t r = 0; r < n_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      d(static_cast<Eigen::Index>(r), cols_[k]) = values_[k];
    }
  }
  return d;
}

ValidationReport validate_bistochastic(const SparseMatrix& a, double tol) {
  ValidationReport report;
  report.tolerance = tol;
  const std::size_t n = a.size();
  std::vector<double> col_sums(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    double row_sum = 0.0;
    const auto cols = a.row_cols(static_cast<Index>(r));
    const auto vals = a.row_values(static_cast<Index>(r));
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (!(vals[k] > 0.0)) report.nonnegative = false;
      row_sum += vals[k];
      col_sums[cols[k]] += vals[k];
    }
    report.max_row_deviation = std::max(report.max_row_deviation, std::abs(row_sum - 1.0));
  }
  for (const double s : col_sums) {
    report.max_col_deviation = std::max(report.max_col_deviation, std::abs(s - 1.0));
  }
  report.passed = report.nonnegative && report.max_row_deviation <= tol && report.max_col_deviation <= tol;
  return report;
}

SparseBistochastic::SparseBistochastic(SparseMatrix a, double tol) : a_(std::move(a)) {
  if (a_.size() == 0) throw ValidationError("bistochastic matrix: dimension must be positive");
  const auto report = validate_bistochastic(a_, tol);
  if (!report.passed) {
    throw ValidationError("bistochastic matrix: validation failed (max row deviation " +
                          std::to_string(report.max_row_deviation) + ", max column deviation " +
                          std::to_string(report.max_col_deviation) +
                          (report.nonnegative ? "" : ", negative weight present") + ")");
  }
}

} // namespace mqlab
