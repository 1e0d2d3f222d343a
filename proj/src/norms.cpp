#include "mqlab/norms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mqlab/error.hpp"

namespace mqlab {

double hs_norm(const SparseMatrix& a) {
  if (a.size() == 0) return 0.0;
  // summed in sorted order: invariant under row relabeling
  std::vector<double> rows(a.size(), 0.0);
  for (std::size_t r = 0; r < a.size(); ++r) {
    for (const double v : a.row_values(static_cast<Index>(r))) rows[r] += v * v;
  }
  std::sort(rows.begin(), rows.end());
  const double sum = std::accumulate(rows.begin(), rows.end(), 0.0);
  return std::sqrt(sum / static_cast<double>(a.size()));
}

double linf_norm(const SparseMatrix& a) {
  double best = 0.0;
  for (const double v : a.values()) best = std::max(best, std::abs(v));
  return best;
}

std::size_t exceptional_budget(std::size_t n, double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw ValidationError("delta must lie in (0, 1]");
  const double bound = std::pow(static_cast<double>(n), 1.0 - delta);
  // largest integer strictly below bound
  auto k = static_cast<std::size_t>(std::ceil(bound)) - 1;
  // pow may land one ulp off an exact integer; settle it against the
  // nearest integer when the bound is numerically integral
  const double nearest = std::round(bound);
  if (std::abs(bound - nearest) <= 1e-9 * std::max(1.0, nearest)) k = static_cast<std::size_t>(nearest) - 1;
  return std::min(k, n);
}

DeltaNorm delta_norm(const SparseMatrix& a, double delta) {
  const std::size_t n = a.size();
  const std::size_t k = exceptional_budget(n, delta);
  std::vector<double> col_max(n, 0.0);
  const auto cols = a.cols();
  const auto vals = a.values();
  for (std::size_t e = 0; e < cols.size(); ++e) col_max[cols[e]] = std::max(col_max[cols[e]], std::abs(vals[e]));

  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index l, Index r) { return col_max[l] > col_max[r]; });

  DeltaNorm out;
  out.witness.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(out.witness.begin(), out.witness.end());
  out.value = k < n ? col_max[order[k]] : 0.0;
  return out;
}

std::size_t gram_support_degree(const SparseMatrix& a) {
  const std::size_t n = a.size();
  // (A^T A)(x, x') != 0 iff some row y holds both x and x'. Walk each column
  // x through A^T to its rows, then collect every column of those rows.
  const SparseMatrix at = a.transpose();
  std::vector<std::size_t> stamp(n, static_cast<std::size_t>(-1));
  std::size_t best = 0;
  for (std::size_t x = 0; x < n; ++x) {
    std::size_t count = 0;
    for (const Index y : at.row_cols(static_cast<Index>(x))) {
      for (const Index x2 : a.row_cols(y)) {
        if (stamp[x2] != x) {
          stamp[x2] = x;
          ++count;
        }
      }
    }
    best = std::max(best, count);
  }
  return best;
}

NormReport rho(const SparseMatrix& q, double delta) {
  NormReport r;
  r.hs = hs_norm(q);
  r.linf = linf_norm(q);
  r.delta = delta;
  auto dn = delta_norm(q, delta);
  r.delta_norm = dn.value;
  r.witness_E = std::move(dn.witness);
  r.d = gram_support_degree(q);
  r.rho = std::max(r.hs, r.delta_norm);
  return r;
}

} // namespace mqlab
